"""
Corpus readers

- plain text: one document per non-empty line
- JSONL (.jsonl / .ndjson): one JSON object per line, text under a
  configurable field
- directories are walked recursively in sorted path order
"""

import json
import logging
from itertools import islice
from pathlib import Path
from typing import Iterable, Iterator, List, Optional, Sequence, Union

import numpy as np

from bpe.exceptions import ParseError

logger = logging.getLogger(__name__)

JSONL_SUFFIXES = {'.jsonl', '.ndjson'}


def corpus_files(paths: Sequence[Union[str, Path]]) -> List[Path]:
    """Expand files and directories into a sorted file list"""
    files = []
    for path in paths:
        path = Path(path)
        if path.is_dir():
            files.extend(sorted(
                p for p in path.rglob('*')
                if p.is_file() and not any(part.startswith('.') for part in p.relative_to(path).parts)
            ))
        elif path.is_file():
            files.append(path)
        else:
            raise FileNotFoundError(f"No such corpus file or directory: {path}")
    return files


def _read_jsonl(path: Path, text_field: str) -> Iterator[bytes]:
    with open(path, 'rb') as f:
        for line_number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise ParseError(f"{path}: {e.msg}", line_number)
            if not isinstance(record, dict) or not isinstance(record.get(text_field), str):
                raise ParseError(f"{path}: no string field {text_field!r}", line_number)
            yield record[text_field].encode('utf-8', errors='surrogatepass')


def _read_lines(path: Path) -> Iterator[bytes]:
    with open(path, 'rb') as f:
        for line in f:
            line = line.rstrip(b'\r\n')
            if line.strip():
                yield line


def iter_documents(paths: Sequence[Union[str, Path]], text_field: str = 'text') -> Iterator[bytes]:
    """
    Stream documents as byte strings

    Args:
        paths: files or directories
        text_field: JSONL field holding the text

    Returns:
        iterator over documents in file order, then line order
    """
    for path in corpus_files(paths):
        if path.suffix.lower() in JSONL_SUFFIXES:
            yield from _read_jsonl(path, text_field)
        else:
            yield from _read_lines(path)


def reservoir_sample(documents: Iterable[bytes], size: int, seed: int = 0) -> List[bytes]:
    """
    Uniform sample of `size` documents in one pass

    The sample keeps corpus order so downstream counting does not depend on
    which slot a document landed in.
    """
    if size < 0:
        raise ValueError(f"Sample size must be non-negative, got {size}")
    rng = np.random.default_rng(seed)
    iterator = enumerate(documents)
    reservoir = list(islice(iterator, size))
    for index, document in iterator:
        slot = int(rng.integers(0, index + 1))
        if slot < size:
            reservoir[slot] = (index, document)
    reservoir.sort(key=lambda item: item[0])
    return [document for _, document in reservoir]


def select_shard(documents: Iterable[bytes], shard_index: int, shard_count: int) -> Iterator[bytes]:
    """Documents i, i+n, i+2n, ... for shard i of n"""
    if shard_count < 1 or not 0 <= shard_index < shard_count:
        raise ValueError(f"Invalid shard {shard_index} of {shard_count}")
    for index, document in enumerate(documents):
        if index % shard_count == shard_index:
            yield document


def load_corpus(
        paths: Sequence[Union[str, Path]],
        text_field: str = 'text',
        sample_size: Optional[int] = None,
        seed: int = 0,
) -> Iterable[bytes]:
    """Documents from `paths`, reservoir-sampled when sample_size is given"""
    documents = iter_documents(paths, text_field)
    if sample_size is None:
        return documents
    sample = reservoir_sample(documents, sample_size, seed)
    logger.info(f"Sampled {len(sample)} documents (seed {seed})")
    return sample
