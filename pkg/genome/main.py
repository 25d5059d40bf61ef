from genome.cli.router import app


def main() -> None:
    app(prog_name="genome")


if __name__ == "__main__":
    main()
