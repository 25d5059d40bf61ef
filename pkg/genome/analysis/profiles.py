from typing import Dict

from genome.core.errors import UnsupportedProfile
from genome.schemas.corpus import FunctionDetection, LanguageProfile

# C, C++, Java, C#, JavaScript and Go share enough surface syntax for one profile.
# Modifiers (static, final, public, ...) are plain keywords here.
C_LIKE_KEYWORDS = frozenset({
    "abstract", "auto", "boolean", "break", "byte", "case", "catch", "char",
    "class", "const", "continue", "default", "delete", "do", "double", "else",
    "enum", "extends", "extern", "false", "final", "finally", "float", "for",
    "function", "goto", "if", "implements", "import", "inline", "instanceof",
    "int", "interface", "long", "namespace", "native", "new", "null", "nullptr",
    "package", "private", "protected", "public", "register", "restrict",
    "return", "short", "signed", "sizeof", "static", "struct", "super",
    "switch", "synchronized", "template", "this", "throw", "throws",
    "transient", "true", "try", "typedef", "typename", "union", "unsigned",
    "using", "var", "virtual", "void", "volatile", "while",
})

C_LIKE = LanguageProfile(
    name="c-like",
    keywords=C_LIKE_KEYWORDS,
    branch_keywords=frozenset({"if", "for", "while", "case", "catch", "&&", "||", "?"}),
    string_delimiters=frozenset({'"', "'"}),
    line_comment="//",
    block_comment=("/*", "*/"),
    directive_marker="#",
    extensions=frozenset({
        ".c", ".h", ".cc", ".cpp", ".cxx", ".hpp", ".hh", ".java", ".js",
        ".mjs", ".ts", ".cs", ".go", ".kt", ".scala", ".swift",
    }),
    function_detection=FunctionDetection.BRACE_HEURISTIC,
)

# Functions arrive already tokenized as corpus JSONL; nothing to detect.
PRE_EXTRACTED = LanguageProfile(
    name="pre-extracted",
    keywords=C_LIKE_KEYWORDS,
    branch_keywords=C_LIKE.branch_keywords,
    extensions=frozenset({".jsonl"}),
    function_detection=FunctionDetection.PRE_EXTRACTED,
)

PROFILES: Dict[str, LanguageProfile] = {p.name: p for p in (C_LIKE, PRE_EXTRACTED)}


def get_profile(name: str) -> LanguageProfile:
    try:
        return PROFILES[name]
    except KeyError:
        raise UnsupportedProfile(
            f"unknown profile {name!r}; available: {', '.join(sorted(PROFILES))}"
        ) from None
