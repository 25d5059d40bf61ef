import typer

# Gene pool
from genome.cli.commands.pool import (
    cluster_command,
    contrib_command,
    diff_command,
    index_command,
    rank_command,
)

# Repository selection
from genome.cli.commands.select import select_command

# Composition analysis
from genome.cli.commands.clone import clone_command
from genome.cli.commands.deps import deps_command
from genome.cli.commands.scan import scan_command

app = typer.Typer(
    add_completion=False,
    no_args_is_help=True,
    help="Software genome analysis: gene pools, clones, dependencies and composition scans.",
)

# --- Gene pool ---
app.command("index")(index_command)
app.command("rank")(rank_command)
app.command("contrib")(contrib_command)
app.command("diff")(diff_command)
app.command("cluster")(cluster_command)

# --- Selection ---
app.command("select")(select_command)

# --- Composition analysis ---
app.command("clone")(clone_command)
app.command("deps")(deps_command)
app.command("scan")(scan_command)
