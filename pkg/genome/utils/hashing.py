FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
MASK_64 = 0xFFFFFFFFFFFFFFFF


def fnv1a_64(data: bytes) -> int:
    """FNV-1a 64-bit over raw bytes."""
    h = FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * FNV_PRIME) & MASK_64
    return h


def fnv1a_text(text: str) -> int:
    return fnv1a_64(text.encode("utf-8"))


def to_hex(value: int) -> str:
    """Zero-padded 16 hex digits; lexicographic order equals numeric order."""
    return f"{value & MASK_64:016x}"


def hash_hex(text: str) -> str:
    return to_hex(fnv1a_text(text))


def function_id_for(repo_id: str, file_path: str, start_line: int, raw_text: str, start_column: int = 1) -> str:
    # NUL separators keep ("ab", "c") and ("a", "bc") apart; a column only
    # joins the location when the record starts mid-line
    location = str(start_line) if start_column == 1 else f"{start_line}:{start_column}"
    return hash_hex(f"{repo_id}\x00{file_path}\x00{location}\x00{raw_text}")
