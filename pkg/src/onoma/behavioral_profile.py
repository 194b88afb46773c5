"""Correspondence analysis of behavioral-profile tables and its plots.

A profile table holds nonnegative association values of feature tags (rows)
against words (columns). Correspondence analysis decomposes the table's
standardized residuals by SVD; the moon plot draws words inside a disc and
feature tags on its circumference, angle encoding association and font size
encoding association strength. Tables here are tiny (tens of rows, a few
columns), so the SVD is a one-sided Jacobi iteration: exact, dependency-free
and deterministic.
"""

from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .svg import SvgDocument, fmt

__all__ = [
    "ProfileTable",
    "CaResult",
    "MoonPlotStyle",
    "MoonPlotSpec",
    "FrameTally",
    "load_profile_table",
    "correspondence_analysis",
    "inertia_report",
    "build_moon_spec",
    "moon_plot",
    "frame_tally",
    "jacobi_svd",
]

SINGULAR_VALUE_FLOOR = 1e-12


@dataclass
class ProfileTable:
    rows: list[tuple[str, str]]  # (tag_type, id_tag)
    columns: list[str]  # word names
    values: np.ndarray  # (n_rows, n_cols) nonnegative

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if len(self.rows) < 2 or len(self.columns) < 2:
            raise ValueError("profile table needs at least 2 rows and 2 columns")
        if self.values.shape != (len(self.rows), len(self.columns)):
            raise ValueError("table shape does not match labels")
        if np.any(self.values < 0):
            raise ValueError("profile table values must be nonnegative")
        if np.any(self.values.sum(axis=1) == 0):
            raise ValueError("profile table has an all-zero row")
        if np.any(self.values.sum(axis=0) == 0):
            raise ValueError("profile table has an all-zero column")

    def row_labels(self) -> list[str]:
        return [f"{t}: {tag}" if t else tag for t, tag in self.rows]


@dataclass
class CaResult:
    row_names: list[str]
    col_names: list[str]
    row_masses: np.ndarray
    col_masses: np.ndarray
    singular_values: np.ndarray  # descending, all > 1e-12
    row_standard: np.ndarray  # (n_rows, k)
    col_standard: np.ndarray  # (n_cols, k)
    row_principal: np.ndarray  # (n_rows, k)
    col_principal: np.ndarray  # (n_cols, k)
    inertia_shares: np.ndarray
    total_inertia: float

    @property
    def n_dims(self) -> int:
        return len(self.singular_values)


def load_profile_table(path) -> ProfileTable:
    """Parse the CSV "tag_type,id_tag,<word1>,..." into a ProfileTable."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError("empty profile table") from None
        if len(header) < 4 or header[0] != "tag_type" or header[1] != "id_tag":
            raise ValueError(
                'profile table header must be "tag_type,id_tag,<word1>,<word2>,..."'
            )
        columns = header[2:]
        rows, values = [], []
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) != len(header):
                raise ValueError(f"ragged row at line {lineno}")
            rows.append((rec[0], rec[1]))
            try:
                vals = [float(v) for v in rec[2:]]
            except ValueError as exc:
                raise ValueError(f"non-numeric value at line {lineno}") from exc
            if any(v < 0 for v in vals):
                raise ValueError(f"negative value at line {lineno}")
            values.append(vals)
    return ProfileTable(rows=rows, columns=columns, values=np.array(values))


def jacobi_svd(matrix: np.ndarray, tol: float = 1e-14,
               max_sweeps: int = 60) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """One-sided Jacobi SVD: matrix = U diag(s) V^T, s descending.

    Column pairs are rotated until all are mutually orthogonal. Each
    singular vector's sign is fixed so its largest-magnitude U component is
    positive, making the decomposition fully deterministic.
    """
    a = np.asarray(matrix, dtype=np.float64)
    transposed = a.shape[0] < a.shape[1]
    if transposed:
        a = a.T
    work = a.copy()
    n = work.shape[1]
    v = np.eye(n)
    for _ in range(max_sweeps):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                alpha = float(work[:, p] @ work[:, p])
                beta = float(work[:, q] @ work[:, q])
                gamma = float(work[:, p] @ work[:, q])
                if abs(gamma) <= tol * math.sqrt(alpha * beta) or gamma == 0.0:
                    continue
                off = max(off, abs(gamma) / math.sqrt(alpha * beta))
                zeta = (beta - alpha) / (2.0 * gamma)
                t = math.copysign(1.0, zeta) / (abs(zeta) + math.hypot(1.0, zeta))
                c = 1.0 / math.hypot(1.0, t)
                s = c * t
                col_p = work[:, p].copy()
                work[:, p] = c * col_p - s * work[:, q]
                work[:, q] = s * col_p + c * work[:, q]
                vp = v[:, p].copy()
                v[:, p] = c * vp - s * v[:, q]
                v[:, q] = s * vp + c * v[:, q]
        if off == 0.0:
            break
    sigma = np.linalg.norm(work, axis=0)
    order = np.argsort(-sigma, kind="stable")
    sigma = sigma[order]
    work = work[:, order]
    v = v[:, order]
    u = np.zeros_like(work)
    for j in range(n):
        if sigma[j] > 0:
            u[:, j] = work[:, j] / sigma[j]
    # sign convention: largest-magnitude component of each left vector positive
    for j in range(n):
        col = u[:, j]
        if np.any(col != 0):
            pivot = int(np.argmax(np.abs(col)))
            if col[pivot] < 0:
                u[:, j] = -col
                v[:, j] = -v[:, j]
    if transposed:
        return v, sigma, u
    return u, sigma, v


def correspondence_analysis(table: ProfileTable) -> CaResult:
    """Simple correspondence analysis of a nonnegative two-way table.

    P = X / sum(X); S = D_r^-1/2 (P - r c^T) D_c^-1/2 = U S V^T. Principal
    coordinates carry the singular values, standard coordinates do not;
    per-dimension inertia is sigma_k^2 / sum(sigma^2). Singular values at or
    below 1e-12 are dropped. The whole result is invariant to scaling the
    table by any positive constant.
    """
    x = table.values
    p = x / x.sum()
    r = p.sum(axis=1)
    c = p.sum(axis=0)
    expected = np.outer(r, c)
    s = (p - expected) / np.sqrt(expected)
    u, sigma, v = jacobi_svd(s)
    keep = sigma > SINGULAR_VALUE_FLOOR
    u, sigma, v = u[:, keep], sigma[keep], v[:, keep]
    inertia = sigma**2
    total = float(inertia.sum())
    shares = inertia / total if total > 0 else inertia
    d_r = np.sqrt(r)[:, None]
    d_c = np.sqrt(c)[:, None]
    row_std = u / d_r
    col_std = v / d_c
    return CaResult(
        row_names=table.row_labels(),
        col_names=list(table.columns),
        row_masses=r,
        col_masses=c,
        singular_values=sigma,
        row_standard=row_std,
        col_standard=col_std,
        row_principal=row_std * sigma[None, :],
        col_principal=col_std * sigma[None, :],
        inertia_shares=shares,
        total_inertia=total,
    )


def inertia_report(ca: CaResult) -> list[dict]:
    """Per-dimension sigma, inertia, share and cumulative share."""
    out = []
    cumulative = 0.0
    for k, sigma in enumerate(ca.singular_values, start=1):
        share = float(ca.inertia_shares[k - 1])
        cumulative += share
        out.append(
            {
                "dimension": k,
                "singular_value": float(sigma),
                "inertia": float(sigma**2),
                "share": share,
                "cumulative": cumulative,
            }
        )
    return out


# ---------------------------------------------------------------------------
# Moon plot
# ---------------------------------------------------------------------------

@dataclass
class MoonPlotStyle:
    width: float = 640.0
    height: float = 640.0
    margin: float = 90.0
    word_fill_ratio: float = 0.55  # words stay inside this fraction of the disc
    min_pt: float = 8.0
    max_pt: float = 22.0
    min_separation_deg: float = 2.5
    font_family: str = "sans-serif"


@dataclass
class MoonPlotSpec:
    width: float
    height: float
    center: tuple[float, float]
    radius: float
    words: list[tuple[str, float, float]]  # (name, x, y) in canvas units
    features: list[tuple[str, float, float]]  # (name, angle_deg, font_pt)


def _two_dims(coords: np.ndarray) -> np.ndarray:
    """First two columns, zero-filling the second if only one exists."""
    if coords.shape[1] >= 2:
        return coords[:, :2]
    return np.column_stack([coords[:, 0], np.zeros(coords.shape[0])])


def _nudge_angles(angles_deg: list[float], min_sep: float,
                  step: float = 0.5) -> list[float]:
    """Greedy separation of circumference labels, preserving angular order."""
    m = len(angles_deg)
    if m <= 1 or min_sep <= 0:
        return list(angles_deg)
    order = sorted(range(m), key=lambda i: (angles_deg[i], i))
    out = [float(angles_deg[i]) for i in order]
    max_rounds = int(360.0 / step) * m
    for _ in range(max_rounds):
        moved = False
        for i in range(1, m):
            if out[i] - out[i - 1] < min_sep:
                out[i] += step
                moved = True
        if not moved:
            break
    result = [0.0] * m
    for pos, idx in enumerate(order):
        result[idx] = out[pos] % 360.0
    return result


def build_moon_spec(ca: CaResult, style: MoonPlotStyle | None = None) -> MoonPlotSpec:
    """Geometry of the moon plot.

    Words (columns) sit at their scaled 2-D principal coordinates inside the
    disc; features (rows) sit on the circumference at the angle of their 2-D
    standard coordinates, font size mapping principal-coordinate norm
    linearly onto [min_pt, max_pt]. Overlapping feature labels are separated
    by greedy 0.5-degree nudges that preserve angular order.
    """
    if ca.n_dims < 1:
        raise ValueError("moon plot needs at least one positive dimension")
    style = style or MoonPlotStyle()
    cx, cy = style.width / 2.0, style.height / 2.0
    radius = min(style.width, style.height) / 2.0 - style.margin

    word_xy = _two_dims(ca.col_principal)
    max_norm = float(np.max(np.linalg.norm(word_xy, axis=1)))
    scale = (radius * style.word_fill_ratio / max_norm) if max_norm > 0 else 0.0
    words = [
        (name, cx + scale * float(xy[0]), cy - scale * float(xy[1]))
        for name, xy in zip(ca.col_names, word_xy)
    ]

    feat_std = _two_dims(ca.row_standard)
    feat_pri = _two_dims(ca.row_principal)
    angles = [
        math.degrees(math.atan2(float(xy[1]), float(xy[0]))) % 360.0
        for xy in feat_std
    ]
    norms = np.linalg.norm(feat_pri, axis=1)
    lo, hi = float(norms.min()), float(norms.max())
    if hi > lo:
        sizes = style.min_pt + (norms - lo) / (hi - lo) * (style.max_pt - style.min_pt)
    else:
        sizes = np.full(len(norms), style.max_pt)
    angles = _nudge_angles(angles, style.min_separation_deg)
    features = [
        (name, float(ang), float(size))
        for name, ang, size in zip(ca.row_names, angles, sizes)
    ]
    return MoonPlotSpec(
        width=style.width, height=style.height, center=(cx, cy),
        radius=radius, words=words, features=features,
    )


def moon_plot(ca: CaResult, style: MoonPlotStyle | None = None) -> str:
    """Standalone SVG 1.1 moon plot; byte-identical for identical inputs."""
    style = style or MoonPlotStyle()
    spec = build_moon_spec(ca, style)
    cx, cy = spec.center
    doc = SvgDocument(spec.width, spec.height)
    doc.rect(0, 0, spec.width, spec.height, fill="white")
    doc.circle(cx, cy, spec.radius, fill="none", stroke="#888888",
               stroke_width="1")
    doc.circle(cx, cy, 2.0, fill="#888888")
    for name, ang, size in spec.features:
        rad = math.radians(ang)
        x = cx + spec.radius * math.cos(rad)
        y = cy - spec.radius * math.sin(rad)
        anchor = "start" if math.cos(rad) >= 0 else "end"
        doc.circle(x, y, 1.5, fill="#555555")
        doc.text(
            x + (4.0 if anchor == "start" else -4.0), y, name,
            font_size=f"{fmt(size)}px", font_family=style.font_family,
            fill="#333333", text_anchor=anchor, dominant_baseline="middle",
        )
    for name, x, y in spec.words:
        doc.circle(x, y, 3.0, fill="#1f4e9c")
        doc.text(
            x, y - 8.0, name,
            font_size="14px", font_family=style.font_family,
            fill="#1f4e9c", text_anchor="middle", font_style="italic",
        )
    return doc.render()


# ---------------------------------------------------------------------------
# Frame-annotation tallying
# ---------------------------------------------------------------------------

@dataclass
class FrameTally:
    """Per language: (frame, lexical unit) counts and within-language shares."""

    counts: dict[str, dict[tuple[str, str], int]]
    totals: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if not self.totals:
            self.totals = {
                lang: sum(c.values()) for lang, c in self.counts.items()
            }

    def proportions(self, lang: str) -> dict[tuple[str, str], float]:
        total = self.totals[lang]
        return {key: c / total for key, c in self.counts[lang].items()}


def frame_tally(annotations: list[tuple[str, str, str]],
                bar_width: float = 120.0, bar_height: float = 420.0,
                label_min_share: float = 0.05) -> tuple[FrameTally, str]:
    """Tally (language, lexical unit, frame) annotations and render the
    stacked-bar SVG: one column per language, segments grouped by frame and
    sized proportionally to counts; only segments above label_min_share get
    a text label."""
    if not annotations:
        raise ValueError("annotations must be nonempty")
    counts: dict[str, Counter] = {}
    for lang, lu, frame in annotations:
        counts.setdefault(lang, Counter())[(frame, lu)] += 1
    tally = FrameTally(counts={k: dict(v) for k, v in sorted(counts.items())})

    langs = sorted(tally.counts)
    frames = sorted({frame for c in tally.counts.values() for frame, _ in c})
    palette = ["#4c78a8", "#f58518", "#54a24b", "#e45756", "#72b7b2",
               "#b279a2", "#9d755d", "#eeca3b"]
    frame_color = {f: palette[i % len(palette)] for i, f in enumerate(frames)}

    gap, margin_top, margin_bottom = 60.0, 30.0, 40.0
    width = gap + len(langs) * (bar_width + gap)
    height = margin_top + bar_height + margin_bottom
    doc = SvgDocument(width, height)
    doc.rect(0, 0, width, height, fill="white")
    for i, lang in enumerate(langs):
        x0 = gap + i * (bar_width + gap)
        total = tally.totals[lang]
        y = margin_top
        segments = sorted(
            tally.counts[lang].items(),
            key=lambda kv: (frames.index(kv[0][0]), kv[0][1]),
        )
        for (frame, lu), count in segments:
            h = bar_height * count / total
            doc.rect(x0, y, bar_width, h, fill=frame_color[frame],
                     stroke="white", stroke_width="0.5")
            if count / total >= label_min_share:
                doc.text(
                    x0 + bar_width / 2.0, y + h / 2.0, lu,
                    font_size="11px", font_family="sans-serif",
                    fill="white", text_anchor="middle",
                    dominant_baseline="middle",
                )
            y += h
        doc.text(
            x0 + bar_width / 2.0, margin_top + bar_height + 18.0, lang,
            font_size="13px", font_family="sans-serif",
            fill="#333333", text_anchor="middle",
        )
    return tally, doc.render()
