from rest_framework import serializers


class SavingsInputSerializer(serializers.Serializer):
    """Model dimensions and removed vocabulary share for the savings estimate"""
    vocab_size = serializers.IntegerField(min_value=1)
    removed_fraction = serializers.FloatField(min_value=0.0, max_value=1.0)
    hidden_dim = serializers.IntegerField(min_value=1)
    tied_embedding = serializers.BooleanField()
    total_params = serializers.IntegerField(min_value=1)
    sequence_length = serializers.IntegerField(min_value=1)
    num_layers = serializers.IntegerField(min_value=1, required=False, allow_null=True, default=None)
    ngram_orders = serializers.ListField(
        child=serializers.IntegerField(min_value=1),
        required=False,
        default=lambda: [2, 3],
    )

    def validate(self, attrs):
        embedding = attrs['vocab_size'] * attrs['hidden_dim'] * (1 if attrs['tied_embedding'] else 2)
        if embedding > attrs['total_params']:
            raise serializers.ValidationError(
                f"Embedding parameters ({embedding}) exceed total_params ({attrs['total_params']})"
            )
        return attrs
