"""Minimal deterministic SVG writer.

Coordinates are formatted with a fixed precision so identical inputs always
produce byte-identical documents (golden-file friendly); no timestamps, no
external references.
"""

from __future__ import annotations

from xml.sax.saxutils import escape, quoteattr

__all__ = ["SvgDocument", "fmt"]


def fmt(value: float) -> str:
    """Fixed 3-decimal formatting; normalizes -0.000 to 0.000."""
    s = f"{float(value):.3f}"
    return "0.000" if s == "-0.000" else s


class SvgDocument:
    def __init__(self, width: float, height: float):
        self.width = width
        self.height = height
        self._parts: list[str] = []

    def _attrs(self, attrs: dict) -> str:
        items = []
        for key, val in attrs.items():
            name = key.replace("_", "-")
            if isinstance(val, float):
                val = fmt(val)
            items.append(f" {name}={quoteattr(str(val))}")
        return "".join(items)

    def element(self, tag: str, **attrs):
        self._parts.append(f"<{tag}{self._attrs(attrs)}/>")

    def line(self, x1, y1, x2, y2, **attrs):
        self.element("line", x1=fmt(x1), y1=fmt(y1), x2=fmt(x2), y2=fmt(y2), **attrs)

    def circle(self, cx, cy, r, **attrs):
        self.element("circle", cx=fmt(cx), cy=fmt(cy), r=fmt(r), **attrs)

    def rect(self, x, y, width, height, **attrs):
        self.element("rect", x=fmt(x), y=fmt(y), width=fmt(width),
                     height=fmt(height), **attrs)

    def text(self, x, y, content: str, **attrs):
        self._parts.append(
            f"<text x={quoteattr(fmt(x))} y={quoteattr(fmt(y))}"
            f"{self._attrs(attrs)}>{escape(content)}</text>"
        )

    def render(self) -> str:
        header = (
            '<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
            f'width="{fmt(self.width)}" height="{fmt(self.height)}" '
            f'viewBox="0 0 {fmt(self.width)} {fmt(self.height)}">'
        )
        return header + "".join(self._parts) + "</svg>\n"
