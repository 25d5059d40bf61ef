from typing import Optional
from pydantic import BaseModel


# Error body, same shape as GenomeError.to_dict()
class ErrorResponse(BaseModel):
    error: str
    message: str


# Non-fatal problem reported next to a result (tokenizer recovery, skipped file, ...)
class Diagnostic(BaseModel):
    code: str
    message: str
    file_path: Optional[str] = None
    line: Optional[int] = None
