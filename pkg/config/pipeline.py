"""
Shared plumbing for the pipeline management commands

- RunConfig: resolved inputs and options, echoed into every artifact
- PipelineCommand: tokenizer loading, artifact writing and translation of
  library errors into exit codes (2 usage, 3 data integrity)
"""

import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from bpe.exceptions import IntegrityError, ParseError, TokenizerError, UnsupportedFlavorError
from bpe.loaders import load_hf, load_native, load_tiktoken
from bpe.tokenizer import TokenizerModel

logger = logging.getLogger(__name__)

USAGE_ERROR = 2
INTEGRITY_ERROR = 3


def usage_error(message: str) -> CommandError:
    return CommandError(message, returncode=USAGE_ERROR)


def integrity_error(message: str) -> CommandError:
    return CommandError(message, returncode=INTEGRITY_ERROR)


def resolve_path(path: Optional[str]) -> Optional[str]:
    return str(Path(path).expanduser().resolve()) if path else None


@dataclass
class RunConfig:
    """
    Everything a command run depends on, with paths resolved

    No timestamps or host details, so identical inputs give identical
    artifacts.
    """
    subcommand: str
    tokenizer: List[str] = field(default_factory=list)
    corpus: List[str] = field(default_factory=list)
    text_field: Optional[str] = None
    thresholds: Optional[Tuple[float, float]] = None
    f2_mode: Optional[str] = None
    neighbor_scope: Optional[str] = None
    count_multiplicity: Optional[bool] = None
    outputs: Dict[str, str] = field(default_factory=dict)
    shards: Optional[int] = None
    seed: Optional[int] = None
    sample_size: Optional[int] = None
    options: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict:
        data = asdict(self)
        if self.thresholds is not None:
            data['thresholds'] = {'ratio': self.thresholds[0], 'entropy': self.thresholds[1]}
        return data


class PipelineCommand(BaseCommand):
    """
    Base class for the residue pipeline commands

    Subclasses implement run(**options) instead of handle().
    """
    requires_system_checks = []
    requires_migrations_checks = False

    def handle(self, *args, **options):
        try:
            self.run(**options)
        except CommandError:
            raise
        except (FileNotFoundError, IsADirectoryError, NotADirectoryError, PermissionError) as e:
            raise usage_error(f"Cannot read input: {e}")
        except UnsupportedFlavorError as e:
            raise usage_error(str(e))
        except (IntegrityError, ParseError) as e:
            logger.error(f"{self.command_name}: {e}")
            raise integrity_error(str(e))
        except TokenizerError as e:
            raise integrity_error(str(e))
        except ValueError as e:
            raise usage_error(str(e))

    def run(self, **options):
        raise NotImplementedError('subclasses of PipelineCommand must provide a run() method')

    @property
    def command_name(self) -> str:
        return self.__module__.rsplit('.', 1)[-1]

    def run_config(self, options: dict, /, **fields) -> RunConfig:
        return RunConfig(subcommand=self.command_name, tokenizer=self.tokenizer_paths(options), **fields)

    # ------------------------------------------------------------------
    # Residue thresholds
    # ------------------------------------------------------------------

    @staticmethod
    def add_threshold_arguments(parser):
        group = parser.add_argument_group('thresholds')
        group.add_argument('--ratio', type=float, help='FI ratio threshold r')
        group.add_argument('--entropy', type=float, help='Neighbor entropy threshold s, in nats')
        group.add_argument(
            '--preset', choices=sorted(settings.RESIDUE_THRESHOLD_PRESETS),
            help=f'Named (r, s) pair per flavor; {settings.DEFAULT_RESIDUE_PRESET!r} is the usual choice',
        )

    @staticmethod
    def resolve_thresholds(options: dict, flavor: str) -> Tuple[float, float]:
        """Explicit --ratio/--entropy, else the named preset for the model's flavor"""
        ratio, entropy = options.get('ratio'), options.get('entropy')
        if (ratio is None) != (entropy is None):
            raise usage_error("Give both --ratio and --entropy, or a --preset")
        if ratio is not None:
            return ratio, entropy
        preset = options.get('preset')
        if not preset:
            raise usage_error(
                "Residue thresholds must be explicit: pass --ratio and --entropy, or --preset "
                f"({', '.join(sorted(settings.RESIDUE_THRESHOLD_PRESETS))})"
            )
        return tuple(settings.RESIDUE_THRESHOLD_PRESETS[preset][flavor])

    # ------------------------------------------------------------------
    # Tokenizer inputs
    # ------------------------------------------------------------------

    @staticmethod
    def add_tokenizer_arguments(parser):
        group = parser.add_argument_group('tokenizer')
        group.add_argument('--tokenizer', help='Native tokenizer JSON')
        group.add_argument('--hf-vocab', help='HF-style vocab.json')
        group.add_argument('--hf-merges', help='HF-style merges.txt')
        group.add_argument('--tiktoken', help='tiktoken rank file')
        group.add_argument(
            '--byte-level', choices=['auto', 'yes', 'no'], default='auto',
            help='Decode HF tokens through the GPT-2 byte table',
        )
        group.add_argument(
            '--special-token', action='append', default=[], dest='special_tokens',
            help='Special token text; repeatable. For tiktoken use TEXT=RANK',
        )

    def tokenizer_paths(self, options: dict) -> List[str]:
        keys = ('tokenizer', 'hf_vocab', 'hf_merges', 'tiktoken')
        return [resolve_path(options[key]) for key in keys if options.get(key)]

    def load_tokenizer(self, options: dict) -> TokenizerModel:
        """Load whichever tokenizer source the options name"""
        cache_size = settings.BPE_CACHE_SIZE
        sources = [key for key in ('tokenizer', 'hf_vocab', 'tiktoken') if options.get(key)]
        if len(sources) != 1:
            raise usage_error("Give exactly one of --tokenizer, --hf-vocab/--hf-merges or --tiktoken")

        if options.get('tokenizer'):
            model = load_native(Path(options['tokenizer']), cache_size=cache_size)
        elif options.get('hf_vocab'):
            if not options.get('hf_merges'):
                raise usage_error("--hf-vocab needs --hf-merges")
            byte_level = {'auto': None, 'yes': True, 'no': False}[options.get('byte_level', 'auto')]
            model = load_hf(
                Path(options['hf_vocab']),
                Path(options['hf_merges']),
                byte_level=byte_level,
                special_tokens=options.get('special_tokens') or (),
                cache_size=cache_size,
            )
        else:
            model = load_tiktoken(
                Path(options['tiktoken']),
                special_tokens=self._tiktoken_specials(options.get('special_tokens') or ()),
                cache_size=cache_size,
            )
        logger.info(f"Tokenizer {model.content_hash[:12]}: {model.flavor}, {len(model)} tokens")
        return model

    @staticmethod
    def _tiktoken_specials(values: Iterable[str]) -> Dict[str, int]:
        specials = {}
        for value in values:
            text, sep, rank = value.rpartition('=')
            if not sep or not text:
                raise usage_error(f"tiktoken special tokens are given as TEXT=RANK, got {value!r}")
            try:
                specials[text] = int(rank)
            except ValueError:
                raise usage_error(f"Invalid rank in {value!r}")
        return specials

    # ------------------------------------------------------------------
    # Corpus inputs
    # ------------------------------------------------------------------

    @staticmethod
    def add_corpus_arguments(parser, flag: str = '--corpus', required: bool = True):
        parser.add_argument(
            flag, nargs='+', required=required, default=[],
            help='Plain-text or JSONL files, or directories of them',
        )
        parser.add_argument('--text-field', default='text', help='JSONL field holding the document text')

    # ------------------------------------------------------------------
    # Artifacts
    # ------------------------------------------------------------------

    @staticmethod
    def check_hash(expected: str, actual: str, what: str):
        if expected != actual:
            raise integrity_error(
                f"{what} was built from tokenizer {expected[:12]}, not {actual[:12]}"
            )

    @staticmethod
    def write_json(path: str, data: dict):
        text = json.dumps(data, sort_keys=True, indent=1, ensure_ascii=False)
        Path(path).write_text(text + '\n', encoding='utf-8')
        logger.info(f"Wrote {path}")

    @staticmethod
    def write_jsonl(path: str, rows: Sequence[dict]):
        with open(path, 'w', encoding='utf-8') as f:
            for row in rows:
                f.write(json.dumps(row, sort_keys=True, ensure_ascii=False) + '\n')
        logger.info(f"Wrote {len(rows)} lines to {path}")

    @staticmethod
    def read_json(path: str) -> dict:
        try:
            return json.loads(Path(path).read_text(encoding='utf-8'))
        except json.JSONDecodeError as e:
            raise ParseError(f"{path} is not valid JSON: {e.msg}", e.lineno)

    @staticmethod
    def read_jsonl(path: str) -> List[dict]:
        rows = []
        with open(path, encoding='utf-8') as f:
            for line_number, line in enumerate(f, start=1):
                if not line.strip():
                    continue
                try:
                    rows.append(json.loads(line))
                except json.JSONDecodeError as e:
                    raise ParseError(f"{path} is not valid JSON lines: {e.msg}", line_number)
        return rows
