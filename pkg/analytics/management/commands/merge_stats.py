from analytics.corpus_stats import StatsShard, merge_shards, shard_counts
from config.pipeline import PipelineCommand, RunConfig, resolve_path


class Command(PipelineCommand):
    help = 'Merge shard statistics files written by analyze_corpus --shard-index'

    def add_arguments(self, parser):
        parser.add_argument('shard_files', nargs='+', help='Shard statistics JSON files')
        parser.add_argument('--output', required=True, help='Merged statistics JSON to write')

    def run(self, **options):
        paths = [resolve_path(path) for path in options['shard_files']]
        shards = [StatsShard.from_dict(self.read_json(path)) for path in paths]
        stats = merge_shards(shards)

        config = RunConfig(
            subcommand=self.command_name,
            f2_mode=stats.f2_mode,
            neighbor_scope=stats.neighbor_scope,
            count_multiplicity=stats.count_multiplicity,
            outputs={'stats': resolve_path(options['output'])},
            shards=len(shards),
            options={'shard_files': paths},
        )
        self.write_json(options['output'], stats.to_dict(config.to_dict()))

        for label, value in shard_counts(stats):
            self.stdout.write(f"{label}: {value}")
        self.stdout.write(self.style.SUCCESS(f"Merged {len(shards)} shards into {options['output']}"))
