"""
Tokenizer asset loaders

- HF style: vocab.json (token -> id) + merges.txt ("left right" per line)
- tiktoken style: "base64(token) rank" per line
- native: single JSON document, optionally carrying an "imr" array
"""

import base64
import io
import json
import logging
from pathlib import Path
from typing import BinaryIO, Dict, Iterable, List, Optional, Tuple, Union

from .exceptions import IntegrityError, ParseError
from .pretokenizer import BYTE_LEVEL_REGEX, PretokenizerConfig
from .serializers import NativeTokenizerSerializer
from .tokenizer import DEFAULT_CACHE_SIZE, RANK_GREEDY, STANDARD, MergeRule, TokenizerModel

logger = logging.getLogger(__name__)

Source = Union[bytes, str, Path, BinaryIO]


def bytes_to_unicode() -> Dict[int, str]:
    """GPT-2 table mapping every byte to a printable unicode character"""
    bs = (
        list(range(ord('!'), ord('~') + 1))
        + list(range(ord('¡'), ord('¬') + 1))
        + list(range(ord('®'), ord('ÿ') + 1))
    )
    cs = bs.copy()
    n = 0
    for b in range(2 ** 8):
        if b not in bs:
            bs.append(b)
            cs.append(2 ** 8 + n)
            n += 1
    return dict(zip(bs, [chr(c) for c in cs]))


BYTE_DECODER = {char: byte for byte, char in bytes_to_unicode().items()}


def _read(source: Source) -> bytes:
    if isinstance(source, bytes):
        return source
    if isinstance(source, (str, Path)):
        return Path(source).read_bytes()
    return source.read()


def _token_bytes(token: str, byte_level: bool) -> bytes:
    if byte_level:
        return bytes(BYTE_DECODER[char] for char in token)
    return token.encode('utf-8')


def load_hf(
        vocab_file: Source,
        merges_file: Source,
        byte_level: Optional[bool] = None,
        special_tokens: Iterable[str] = (),
        pretokenizer: Optional[PretokenizerConfig] = None,
        cache_size: int = DEFAULT_CACHE_SIZE,
) -> TokenizerModel:
    """
    Load an HF-style vocab.json + merges.txt pair

    Args:
        vocab_file: JSON object mapping token strings to ids
        merges_file: one "left right" pair per line, rank order; a
            "#version" header line is tolerated
        byte_level: decode tokens through the GPT-2 byte table; auto-detected
            when None (every character of every token is in the table)
        special_tokens: token strings to treat as specials
        pretokenizer: defaults to the GPT-2 regex for byte-level assets

    Returns:
        standard-flavor TokenizerModel
    """
    try:
        raw_vocab = json.loads(_read(vocab_file).decode('utf-8'))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ParseError(f"vocab file is not valid JSON: {e}", getattr(e, 'lineno', None))
    if not isinstance(raw_vocab, dict):
        raise ParseError("vocab file must be a JSON object mapping tokens to ids", 1)

    if byte_level is None:
        byte_level = all(char in BYTE_DECODER for token in raw_vocab for char in token)
        logger.debug(f"Byte-level vocabulary detected: {byte_level}")

    special_tokens = set(special_tokens)
    size = len(raw_vocab)
    vocab: List[Optional[bytes]] = [None] * size
    for token, token_id in raw_vocab.items():
        if not isinstance(token_id, int) or not 0 <= token_id < size:
            raise IntegrityError(f"Token {token!r} has id {token_id!r}; ids must be dense in [0, {size})")
        if vocab[token_id] is not None:
            raise IntegrityError(f"Id {token_id} assigned twice")
        if token in special_tokens:
            vocab[token_id] = token.encode('utf-8')
        else:
            try:
                vocab[token_id] = _token_bytes(token, byte_level)
            except KeyError:
                raise IntegrityError(f"Token {token!r} is not byte-level encoded")
    token_to_id = {token: token_id for token_id, token in enumerate(vocab)}

    merges = []
    lines = _read(merges_file).decode('utf-8').splitlines()
    for line_number, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or (line_number == 1 and stripped.startswith('#version')):
            continue
        parts = line.split(' ')
        if len(parts) != 2 or not parts[0] or not parts[1]:
            raise ParseError(f"expected 'left right', got {line!r}", line_number)
        left, right = (_merge_part(part, byte_level, special_tokens, line_number) for part in parts)
        for part in (left, right, left + right):
            if part not in token_to_id:
                raise IntegrityError(f"line {line_number}: merge {line!r} references unknown token {part!r}")
        merges.append(MergeRule(len(merges), token_to_id[left], token_to_id[right], token_to_id[left + right]))

    produced = {rule.result for rule in merges}
    specials = {token_to_id[token.encode('utf-8')] for token in special_tokens if token.encode('utf-8') in token_to_id}
    base_ids = set()
    for token_id, token in enumerate(vocab):
        if token_id in produced or token_id in specials:
            continue
        # Non-mergeable entries longer than one character are added tokens
        if len(token.decode('utf-8', errors='surrogateescape')) > 1:
            specials.add(token_id)
        else:
            base_ids.add(token_id)

    if pretokenizer is None:
        pretokenizer = PretokenizerConfig(mode=BYTE_LEVEL_REGEX) if byte_level else PretokenizerConfig()

    model = TokenizerModel(
        vocab=vocab,
        base_ids=base_ids,
        merges=merges,
        flavor=STANDARD,
        pretokenizer=pretokenizer,
        specials=specials,
        cache_size=cache_size,
    )
    if not model.covers_all_bytes:
        logger.warning(
            f"Base alphabet misses {len(model.missing_bytes)} of 256 byte values; input holding them cannot be encoded"
        )
    logger.info(f"Loaded HF tokenizer: {len(vocab)} tokens, {len(merges)} merges, {len(specials)} specials")
    return model


def _merge_part(part: str, byte_level: bool, special_tokens: set, line_number: int) -> bytes:
    if part in special_tokens:
        return part.encode('utf-8')
    try:
        return _token_bytes(part, byte_level)
    except KeyError:
        raise ParseError(f"merge part {part!r} is not byte-level encoded", line_number)


def load_tiktoken(
        rank_file: Source,
        special_tokens: Optional[Dict[str, int]] = None,
        pretokenizer: Optional[PretokenizerConfig] = None,
        cache_size: int = DEFAULT_CACHE_SIZE,
) -> TokenizerModel:
    """
    Load a tiktoken rank file

    Args:
        rank_file: one "base64(token) rank" pair per line
        special_tokens: optional {text: rank} appended as specials
        pretokenizer: defaults to the GPT-2 regex

    Returns:
        rank_greedy TokenizerModel with ids assigned in rank order
    """
    entries: List[Tuple[int, bytes]] = []
    seen_ranks: Dict[int, int] = {}
    seen_tokens = set()
    for line_number, line in enumerate(_read(rank_file).decode('utf-8').splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"expected 'base64 rank', got {line!r}", line_number)
        try:
            token = base64.b64decode(parts[0], validate=True)
            rank = int(parts[1])
        except ValueError as e:
            raise ParseError(f"cannot parse {line!r}: {e}", line_number)
        if rank in seen_ranks:
            raise IntegrityError(f"line {line_number}: rank {rank} already used on line {seen_ranks[rank]}")
        if not token or token in seen_tokens:
            raise IntegrityError(f"line {line_number}: empty or duplicate token {token!r}")
        seen_ranks[rank] = line_number
        seen_tokens.add(token)
        entries.append((rank, token))

    special_entries = [(rank, text.encode('utf-8')) for text, rank in (special_tokens or {}).items()]
    for rank, token in special_entries:
        if rank in seen_ranks or token in seen_tokens:
            raise IntegrityError(f"Special token {token!r} collides with the rank table")

    ordered = sorted(entries + special_entries)
    special_set = {token for _, token in special_entries}
    vocab = [token for _, token in ordered]
    ranks = [rank for rank, _ in ordered]
    base_ids = {i for i, token in enumerate(vocab) if len(token) == 1 and token not in special_set}
    specials = {i for i, token in enumerate(vocab) if token in special_set}

    single_bytes = {vocab[i][0] for i in base_ids}
    for token in seen_tokens:
        missing = set(token) - single_bytes
        if missing:
            raise IntegrityError(
                f"Token {token!r} uses byte(s) {sorted(missing)} with no single-byte token"
            )

    model = TokenizerModel(
        vocab=vocab,
        base_ids=base_ids,
        merges=(),
        flavor=RANK_GREEDY,
        pretokenizer=pretokenizer or PretokenizerConfig(mode=BYTE_LEVEL_REGEX),
        specials=specials,
        ranks=ranks,
        cache_size=cache_size,
    )
    logger.info(f"Loaded tiktoken table: {len(vocab)} tokens, {len(base_ids)} base")
    return model


def read_native(source: Source) -> dict:
    """Parse and validate a native document"""
    try:
        data = json.loads(_read(source).decode('utf-8'))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ParseError(f"not a valid native tokenizer document: {e}", getattr(e, 'lineno', None))

    serializer = NativeTokenizerSerializer(data=data)
    if not serializer.is_valid():
        raise IntegrityError(f"Invalid native tokenizer document: {dict(serializer.errors)}")
    return dict(serializer.validated_data)


def load_native(source: Source, cache_size: int = DEFAULT_CACHE_SIZE) -> TokenizerModel:
    data = read_native(source)
    try:
        return TokenizerModel.from_native(data, cache_size=cache_size)
    except (ValueError, TypeError) as e:
        raise IntegrityError(f"Invalid native tokenizer document: {e}")


def save_native(model: TokenizerModel, destination: Union[str, Path, io.TextIOBase], extra: Optional[dict] = None):
    """Write the native JSON document, merged with any extra top-level fields"""
    data = model.to_native()
    if extra:
        data.update(extra)
    text = json.dumps(data, sort_keys=True, indent=1)
    if isinstance(destination, (str, Path)):
        Path(destination).write_text(text + '\n', encoding='utf-8')
    else:
        destination.write(text + '\n')
