import logging
from pathlib import Path

from analytics.residue import ResidueReport
from config.pipeline import PipelineCommand, resolve_path, usage_error
from pruning.lite import build_lite, export_mask, save_lite

logger = logging.getLogger(__name__)


class Command(PipelineCommand):
    help = 'Remove residue tokens from a tokenizer and export the output mask'

    def add_arguments(self, parser):
        self.add_tokenizer_arguments(parser)
        source = parser.add_mutually_exclusive_group(required=True)
        source.add_argument('--imr', help='IMR file from identify_residue')
        source.add_argument('--report', help='Residue report (JSON lines) from identify_residue')
        parser.add_argument(
            '--remove-unobserved', action='store_true',
            help='Also remove eligible tokens never seen in the analyzed corpus',
        )
        parser.add_argument('--output', required=True, help='Lite tokenizer JSON to write')
        parser.add_argument('--mask-json', help='Removed id list to write')
        parser.add_argument('--mask-bin', help='Raw little-endian bitmask to write')

    def run(self, **options):
        model = self.load_tokenizer(options)

        if options.get('imr'):
            data = self.read_json(options['imr'])
            for key in ('model_hash', 'imr'):
                if key not in data:
                    raise usage_error(f"{options['imr']} has no {key!r} field; not an IMR file")
            self.check_hash(data['model_hash'], model.content_hash, 'IMR file')
            removed = set(data['imr'])
            if options['remove_unobserved']:
                removed.update(data.get('unobserved', []))
            source = resolve_path(options['imr'])
        else:
            report = ResidueReport.from_rows(self.read_jsonl(options['report']))
            self.check_hash(report.model_hash, model.content_hash, 'Residue report')
            removed = set(report.removal_set(include_unobserved=options['remove_unobserved']))
            source = resolve_path(options['report'])

        lite = build_lite(model, removed)
        outputs = {'tokenizer': resolve_path(options['output'])}
        if options.get('mask_json'):
            outputs['mask_json'] = resolve_path(options['mask_json'])
        if options.get('mask_bin'):
            outputs['mask_bin'] = resolve_path(options['mask_bin'])
        config = self.run_config(
            options,
            outputs=outputs,
            options={'source': source, 'remove_unobserved': options['remove_unobserved']},
        ).to_dict()

        save_lite(lite, options['output'], extra={'model_hash': model.content_hash, 'run_config': config})

        removed_ids, bits = export_mask(lite)
        if options.get('mask_json'):
            self.write_json(options['mask_json'], {
                'model_hash': model.content_hash,
                'vocab_size': len(model),
                'removed_ids': removed_ids,
                'run_config': config,
            })
        if options.get('mask_bin'):
            Path(options['mask_bin']).write_bytes(bits)
            logger.info(f"Wrote {len(bits)}-byte mask to {options['mask_bin']}")

        self.stdout.write(self.style.SUCCESS(
            f"Removed {len(removed_ids)} of {len(model)} tokens -> {options['output']}"
        ))
