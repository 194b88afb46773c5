"""Instance-length standardization.

Collected instances are cut to roughly equal translation-practice lengths:
Chinese 100 characters, English 60 words, Japanese 135 characters. When the
target word's offset is known the window is centered on it so the target
always survives the cut; otherwise the window starts at the beginning.
Standardization is idempotent.
"""

from __future__ import annotations

from dataclasses import dataclass

__all__ = ["LengthRule", "RULES", "rule_for_lang", "standardize_length"]


@dataclass(frozen=True)
class LengthRule:
    lang: str
    unit: str  # "chars" or "words"
    limit: int


RULES = {
    "zh": LengthRule("zh", "chars", 100),
    "en": LengthRule("en", "words", 60),
    "ja": LengthRule("ja", "chars", 135),
}


def rule_for_lang(lang: str) -> LengthRule:
    try:
        return RULES[lang]
    except KeyError:
        raise ValueError(f"no length rule for language {lang!r}") from None


def _window(length: int, limit: int, offset: int | None) -> tuple[int, int]:
    if length <= limit:
        return 0, length
    if offset is None:
        return 0, limit
    start = min(max(offset - limit // 2, 0), length - limit)
    return start, start + limit


def standardize_length(text: str, lang: str, rule: LengthRule | None = None,
                       target_offset: int | None = None) -> str:
    """Cut text to the language's standard length.

    target_offset is a character index for character rules and a word index
    for word rules; when given, the window is centered on it.
    """
    rule = rule or rule_for_lang(lang)
    if rule.lang != lang:
        raise ValueError(f"rule for {rule.lang!r} does not match language {lang!r}")
    if rule.unit == "chars":
        start, stop = _window(len(text), rule.limit, target_offset)
        return text[start:stop]
    words = text.split()
    if len(words) <= rule.limit:
        return text
    start, stop = _window(len(words), rule.limit, target_offset)
    return " ".join(words[start:stop])
