from rest_framework import serializers

from .pretokenizer import PRETOKENIZER_MODES
from .tokenizer import FLAVORS, NATIVE_FORMAT


class PretokenizerSerializer(serializers.Serializer):
    """Pretokenizer block of the native format"""
    mode = serializers.ChoiceField(choices=PRETOKENIZER_MODES)
    pattern = serializers.CharField(allow_null=True, required=False, default=None)


class NativeTokenizerSerializer(serializers.Serializer):
    """
    Structural validation of a native tokenizer document

    Semantic checks (concatenation, coverage, duplicate ranks) happen when the
    TokenizerModel is constructed.
    """
    format = serializers.ChoiceField(choices=[NATIVE_FORMAT])
    version = serializers.IntegerField(min_value=1, max_value=1)
    flavor = serializers.ChoiceField(choices=FLAVORS)
    pretokenizer = PretokenizerSerializer(required=False)
    vocab = serializers.ListField(child=serializers.CharField(), allow_empty=False)
    base_ids = serializers.ListField(child=serializers.IntegerField(min_value=0))
    merges = serializers.ListField(
        child=serializers.ListField(
            child=serializers.IntegerField(min_value=0),
            min_length=4,
            max_length=4,
        ),
        required=False,
        default=list,
    )
    ranks = serializers.ListField(child=serializers.IntegerField(min_value=0), required=False)
    specials = serializers.ListField(child=serializers.IntegerField(min_value=0), required=False, default=list)
    imr = serializers.ListField(child=serializers.IntegerField(min_value=0), required=False)

    def validate(self, attrs):
        if attrs['flavor'] == 'rank_greedy' and 'ranks' not in attrs:
            raise serializers.ValidationError("rank_greedy tokenizers need a ranks list")
        if attrs['flavor'] == 'rank_greedy' and attrs.get('merges'):
            raise serializers.ValidationError("rank_greedy tokenizers store no merges")
        return attrs
