"""
Errors raised by the tokenizer library.
"""

from typing import Optional


class TokenizerError(Exception):
    """Base class for every tokenizer library error"""


class ParseError(TokenizerError):
    """A tokenizer asset could not be parsed"""

    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class IntegrityError(TokenizerError):
    """Inputs are well formed but inconsistent with each other"""


class EligibilityError(IntegrityError):
    """A token that must never be removed was asked to be removed"""


class UnknownByteError(TokenizerError):
    """Input contains a byte the base alphabet does not cover"""


class UnsupportedFlavorError(TokenizerError):
    """Operation is not defined for the model's encoding flavor"""


class CannotSplitError(TokenizerError):
    """Base tokens have no parent pair"""


class InvalidTokenError(TokenizerError):
    """Token id outside the vocabulary or decomposition not admissible"""
