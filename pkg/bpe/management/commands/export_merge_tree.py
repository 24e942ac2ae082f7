import json
import logging
from pathlib import Path

from analytics.residue import ResidueReport
from bpe.merge_graph import build_graph, merge_tree, to_dot
from config.pipeline import PipelineCommand, resolve_path, usage_error

logger = logging.getLogger(__name__)


class Command(PipelineCommand):
    help = 'Export the merge tree of a token as Graphviz DOT or nested JSON'

    def add_arguments(self, parser):
        self.add_tokenizer_arguments(parser)
        target = parser.add_mutually_exclusive_group(required=True)
        target.add_argument('--token', help='Token text; a leading ␣ stands for a space')
        target.add_argument('--token-id', type=int)
        parser.add_argument('--format', choices=['dot', 'json'], default='dot')
        parser.add_argument('--report', help='Residue report (JSONL) used to colour nodes by category')
        parser.add_argument('--output', help='Write here instead of stdout')

    def run(self, **options):
        model = self.load_tokenizer(options)

        if options.get('token') is not None:
            text = options['token']
            stripped = text.lstrip('␣')
            token_bytes = (' ' * (len(text) - len(stripped)) + stripped).encode('utf-8')
            token = model.token_to_id.get(token_bytes)
            if token is None:
                raise usage_error(f"Token {options['token']!r} is not in the vocabulary")
        else:
            token = options['token_id']
            if not 0 <= token < len(model):
                raise usage_error(f"Token id {token} outside vocabulary of size {len(model)}")

        categories = None
        if options.get('report'):
            report = ResidueReport.from_rows(self.read_jsonl(options['report']))
            self.check_hash(report.model_hash, model.content_hash, 'Residue report')
            categories = {record.token: record.category for record in report.records}

        graph = build_graph(model)
        tree = merge_tree(graph, model, token, categories)
        if options['format'] == 'dot':
            output = to_dot(tree)
        else:
            output = json.dumps(tree, indent=1, ensure_ascii=False) + '\n'

        if options.get('output'):
            Path(options['output']).write_text(output, encoding='utf-8')
            logger.info(f"Merge tree of {model.display(token)} written to {resolve_path(options['output'])}")
        else:
            self.stdout.write(output, ending='')
