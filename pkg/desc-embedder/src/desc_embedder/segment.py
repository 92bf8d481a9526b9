"""Sentence segmentation for mixed CJK / Latin description text."""

_TERMINATORS = set("。！？.!?")


def split_sentences(text: str) -> list[str]:
    """Split on sentence-final punctuation, keeping the terminator with its
    sentence.  Whitespace is trimmed, empty segments dropped, and a trailing
    fragment without a terminator still counts as a sentence.
    """
    sentences: list[str] = []
    start = 0
    for i, ch in enumerate(text):
        if ch in _TERMINATORS:
            piece = text[start : i + 1].strip()
            # punctuation-only runs ("...", stray "。") carry no content
            if piece and piece[:-1].strip():
                sentences.append(piece)
            start = i + 1
    rest = text[start:].strip()
    if rest:
        sentences.append(rest)
    return sentences
