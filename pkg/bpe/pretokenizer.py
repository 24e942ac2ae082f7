"""
Pretokenization: split raw bytes into the units merges are confined to.

Pieces always partition the input, so joining them gives back the original
bytes. Text is decoded with ``surrogateescape`` so arbitrary (non UTF-8)
bytes survive the regex pass unchanged.
"""

import logging
import re
from dataclasses import dataclass
from typing import Iterable, List, Optional, Tuple

import regex

logger = logging.getLogger(__name__)

WHITESPACE_PREFIX = 'whitespace_prefix'
BYTE_LEVEL_REGEX = 'byte_level_regex'
NO_PRETOKENIZER = 'none'

PRETOKENIZER_MODES = (WHITESPACE_PREFIX, BYTE_LEVEL_REGEX, NO_PRETOKENIZER)

# Maximal non-whitespace run with at most one leading space; whitespace runs
# leave their last space to the following word.
WHITESPACE_PREFIX_PATTERN = r""" ?\S+|\s+(?!\S)|\s+"""

GPT2_PATTERN = r"""'s|'t|'re|'ve|'m|'ll|'d| ?\p{L}+| ?\p{N}+| ?[^\s\p{L}\p{N}]+|\s+(?!\S)|\s+"""


@dataclass(frozen=True)
class PretokenizerConfig:
    """
    How text is cut into pretokens before merging

    Args:
        mode: one of PRETOKENIZER_MODES
        pattern: custom regex for byte_level_regex mode (GPT-2 pattern when None)
    """
    mode: str = WHITESPACE_PREFIX
    pattern: Optional[str] = None

    def __post_init__(self):
        if self.mode not in PRETOKENIZER_MODES:
            raise ValueError(f"Unknown pretokenizer mode: {self.mode}")

    def to_dict(self) -> dict:
        return {'mode': self.mode, 'pattern': self.pattern}

    @classmethod
    def from_dict(cls, data: Optional[dict]) -> 'PretokenizerConfig':
        if not data:
            return cls()
        return cls(mode=data.get('mode', WHITESPACE_PREFIX), pattern=data.get('pattern'))


class Pretokenizer:
    """Callable splitting a byte string into pretokens"""

    def __init__(self, config: PretokenizerConfig):
        self.config = config
        self.compiled = None
        if config.mode == WHITESPACE_PREFIX:
            self.compiled = regex.compile(config.pattern or WHITESPACE_PREFIX_PATTERN)
        elif config.mode == BYTE_LEVEL_REGEX:
            self.compiled = regex.compile(config.pattern or GPT2_PATTERN)

    def split(self, data: bytes) -> List[bytes]:
        """
        Split bytes into pretokens

        Args:
            data: raw input bytes

        Returns:
            List of non-empty byte strings whose concatenation equals data
        """
        if not data:
            return []
        if self.compiled is None:
            return [data]

        text = data.decode('utf-8', errors='surrogateescape')
        pieces = [
            piece.encode('utf-8', errors='surrogateescape')
            for piece in self.compiled.findall(text)
        ]

        # A custom pattern may skip characters; fall back to one pretoken
        # rather than silently dropping input.
        if sum(len(piece) for piece in pieces) != len(data):
            logger.warning("Pretokenizer pattern does not cover the input; using a single pretoken")
            return [data]
        return pieces

    __call__ = split


def split_specials(data: bytes, specials: Iterable[bytes]) -> List[Tuple[bytes, bool]]:
    """
    Cut special-token occurrences out of the input before pretokenization

    Args:
        data: raw input bytes
        specials: special token byte strings

    Returns:
        List of (chunk, is_special) in input order
    """
    specials = sorted({s for s in specials if s}, key=lambda s: (-len(s), s))
    if not specials or not data:
        return [(data, False)] if data else []

    pattern = re.compile(b'(' + b'|'.join(re.escape(s) for s in specials) + b')')
    chunks = []
    for index, chunk in enumerate(pattern.split(data)):
        if not chunk:
            continue
        # Capturing split alternates plain text and delimiters
        chunks.append((chunk, index % 2 == 1))
    return chunks
