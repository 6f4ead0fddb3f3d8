"""Point clouds: sampling, domains, scaling maps, and serialization.

A ``PointCloud`` is an immutable sampled configuration together with its
domain, sampling model, and seed; re-sampling with the same triple reproduces
it bit for bit.  Directed clouds store rows ``(t, x)`` sorted strictly by
``t``; planar clouds store ``(x, y)``; weighted clouds store ``(w, x, y)``.
The implicit origin ``(0, 0)`` of directed chains is a convention and is
never stored.

Binary layout (version 1, little-endian)::

    magic   b"CLPP"
    version u16
    model   u8   (0 uniform, 1 poisson, 2 heavy-tail)
    domain  u8   (0 box, 1 strip, 2 disk, 3 weighted window)
    seed    u64
    count   u64
    domain parameters as f64 (box/strip: 2, disk: 1, weighted window: 2)
    model parameters as f64 (uniform: m, poisson: lambda, heavy-tail: alpha wmin)
    points  f64 pairs or triples, row major
    annotation u32 length + utf-8 bytes

The JSON debug form carries the same fields; both round-trip exactly.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass
from typing import NamedTuple, Optional, Union

import numpy as np

from .rng import stream


class DirectedPoint(NamedTuple):
    t: float
    x: float


class PlanarPoint(NamedTuple):
    x: float
    y: float


class WeightedPoint(NamedTuple):
    w: float
    x: float
    y: float


@dataclass(frozen=True)
class Box:
    """Time-space box [0, t] x [-halfwidth, halfwidth]."""

    t: float
    halfwidth: float

    def __post_init__(self):
        if self.t <= 0 or self.halfwidth <= 0:
            raise ValueError("box extents must be positive")


@dataclass(frozen=True)
class Strip:
    """Horizon [0, t], unbounded in space but truncated to |x| <= window
    for simulation; the window is recorded so clipping bias is auditable."""

    t: float
    window: float

    def __post_init__(self):
        if self.t <= 0 or self.window <= 0:
            raise ValueError("strip extents must be positive")


@dataclass(frozen=True)
class Disk:
    r: float

    def __post_init__(self):
        if self.r <= 0:
            raise ValueError("disk radius must be positive")


@dataclass(frozen=True)
class WeightedWindow:
    """Spatial disk of radius R with weights truncated below at wmin."""

    R: float
    wmin: float

    def __post_init__(self):
        if self.R <= 0 or self.wmin <= 0:
            raise ValueError("window extents must be positive")


Domain = Union[Box, Strip, Disk, WeightedWindow]


@dataclass(frozen=True)
class Uniform:
    m: int


@dataclass(frozen=True)
class Poisson:
    lam: float


@dataclass(frozen=True)
class HeavyTail:
    alpha: float
    wmin: float


Model = Union[Uniform, Poisson, HeavyTail]

_DOMAIN_TAGS = {Box: 0, Strip: 1, Disk: 2, WeightedWindow: 3}
_MODEL_TAGS = {Uniform: 0, Poisson: 1, HeavyTail: 2}

MAGIC = b"CLPP"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class PointCloud:
    """Immutable sampled configuration.

    ``pts`` has shape (n, 2) for directed/planar clouds and (n, 3) for
    weighted clouds.  ``kind`` is one of "directed", "planar", "weighted".
    """

    domain: Domain
    pts: np.ndarray
    seed: int
    model: Model
    kind: str
    annotation: str = ""

    def __post_init__(self):
        pts = np.ascontiguousarray(self.pts, dtype=np.float64)
        pts.setflags(write=False)
        object.__setattr__(self, "pts", pts)
        if self.kind not in ("directed", "planar", "weighted"):
            raise ValueError(f"unknown cloud kind {self.kind!r}")

    @property
    def n(self) -> int:
        return self.pts.shape[0]

    # Directed accessors
    @property
    def ts(self) -> np.ndarray:
        assert self.kind == "directed"
        return self.pts[:, 0]

    @property
    def xs(self) -> np.ndarray:
        assert self.kind == "directed"
        return self.pts[:, 1]

    def point(self, i: int):
        row = self.pts[i]
        if self.kind == "directed":
            return DirectedPoint(row[0], row[1])
        if self.kind == "planar":
            return PlanarPoint(row[0], row[1])
        return WeightedPoint(row[0], row[1], row[2])

    # ------------------------------------------------------------------
    # serialization
    def to_bytes(self) -> bytes:
        dtag = _DOMAIN_TAGS[type(self.domain)]
        mtag = _MODEL_TAGS[type(self.model)]
        head = struct.pack("<4sHBBQQ", MAGIC, FORMAT_VERSION, mtag, dtag,
                           self.seed, self.n)
        dpar = _domain_params(self.domain)
        mpar = _model_params(self.model)
        body = self.pts.astype("<f8").tobytes()
        ann = self.annotation.encode("utf-8")
        return (head
                + struct.pack(f"<{len(dpar)}d", *dpar)
                + struct.pack(f"<{len(mpar)}d", *mpar)
                + body
                + struct.pack("<I", len(ann)) + ann)

    @staticmethod
    def from_bytes(buf: bytes) -> "PointCloud":
        magic, version, mtag, dtag, seed, count = struct.unpack_from(
            "<4sHBBQQ", buf, 0)
        if magic != MAGIC:
            raise ValueError("not a CLPP cloud file")
        if version != FORMAT_VERSION:
            raise ValueError(f"unsupported cloud format version {version}")
        off = struct.calcsize("<4sHBBQQ")
        domain, off = _read_domain(dtag, buf, off)
        model, off = _read_model(mtag, buf, off)
        kind = _kind_for_domain(domain)
        width = 3 if kind == "weighted" else 2
        pts = np.frombuffer(buf, dtype="<f8", count=count * width,
                            offset=off).reshape(count, width).copy()
        off += count * width * 8
        (alen,) = struct.unpack_from("<I", buf, off)
        off += 4
        annotation = buf[off:off + alen].decode("utf-8")
        return PointCloud(domain=domain, pts=pts, seed=seed, model=model,
                          kind=kind, annotation=annotation)

    def to_json(self) -> str:
        doc = {
            "format": "clpp-cloud",
            "version": FORMAT_VERSION,
            "kind": self.kind,
            "domain": {"type": type(self.domain).__name__.lower(),
                       "params": _domain_params(self.domain)},
            "model": {"type": type(self.model).__name__.lower(),
                      "params": _model_params(self.model)},
            "seed": self.seed,
            "annotation": self.annotation,
            "points": self.pts.tolist(),
        }
        return json.dumps(doc, sort_keys=True, indent=1) + "\n"

    @staticmethod
    def from_json(text: str) -> "PointCloud":
        doc = json.loads(text)
        if doc.get("format") != "clpp-cloud":
            raise ValueError("not a cloud JSON document")
        dtag = {"box": 0, "strip": 1, "disk": 2, "weightedwindow": 3}[
            doc["domain"]["type"]]
        domain = _domain_from_params(dtag, doc["domain"]["params"])
        mtag = {"uniform": 0, "poisson": 1, "heavytail": 2}[
            doc["model"]["type"]]
        model = _model_from_params(mtag, doc["model"]["params"])
        pts = np.asarray(doc["points"], dtype=np.float64)
        if pts.size == 0:
            pts = pts.reshape(0, 3 if mtag == 2 else 2)
        return PointCloud(domain=domain, pts=pts, seed=doc["seed"],
                          model=model, kind=doc["kind"],
                          annotation=doc.get("annotation", ""))


def _domain_params(d: Domain) -> list:
    if isinstance(d, Box):
        return [d.t, d.halfwidth]
    if isinstance(d, Strip):
        return [d.t, d.window]
    if isinstance(d, Disk):
        return [d.r]
    return [d.R, d.wmin]


def _model_params(m: Model) -> list:
    if isinstance(m, Uniform):
        return [float(m.m)]
    if isinstance(m, Poisson):
        return [m.lam]
    return [m.alpha, m.wmin]


def _domain_from_params(tag: int, p) -> Domain:
    if tag == 0:
        return Box(p[0], p[1])
    if tag == 1:
        return Strip(p[0], p[1])
    if tag == 2:
        return Disk(p[0])
    if tag == 3:
        return WeightedWindow(p[0], p[1])
    raise ValueError(f"unknown domain tag {tag}")


def _model_from_params(tag: int, p) -> Model:
    if tag == 0:
        return Uniform(int(p[0]))
    if tag == 1:
        return Poisson(p[0])
    if tag == 2:
        return HeavyTail(p[0], p[1])
    raise ValueError(f"unknown model tag {tag}")


def _read_domain(tag, buf, off):
    npar = {0: 2, 1: 2, 2: 1, 3: 2}[tag]
    params = struct.unpack_from(f"<{npar}d", buf, off)
    return _domain_from_params(tag, params), off + npar * 8


def _read_model(tag, buf, off):
    npar = {0: 1, 1: 1, 2: 2}[tag]
    params = struct.unpack_from(f"<{npar}d", buf, off)
    return _model_from_params(tag, params), off + npar * 8


def _kind_for_domain(domain: Domain) -> str:
    if isinstance(domain, (Box, Strip)):
        return "directed"
    if isinstance(domain, Disk):
        return "planar"
    return "weighted"


def _sort_directed(ts, xs):
    # strict t order; exact ties (probability zero, but possible after
    # deserialization) break by x then original index
    order = np.lexsort((np.arange(ts.size), xs, ts))
    return ts[order], xs[order]


# ----------------------------------------------------------------------
# samplers

def sample_uniform_box(m: int, t: float, x: float, seed: int) -> PointCloud:
    """m i.i.d. uniform points in [0, t] x [-x, x], sorted by time."""
    if t <= 0 or x <= 0:
        raise ValueError("t and x must be positive")
    if m < 0:
        raise ValueError("m must be nonnegative")
    g = stream(seed)
    ts = g.uniform(0.0, t, size=m)
    xs = g.uniform(-x, x, size=m)
    ts, xs = _sort_directed(ts, xs)
    return PointCloud(domain=Box(t, x), pts=np.column_stack([ts, xs]),
                      seed=seed, model=Uniform(m), kind="directed")


def sample_poisson_strip(lam: float, t: float, window: float,
                         seed: int) -> PointCloud:
    """Poisson(lam) process on [0, t] x R, truncated to |x| <= window.

    The point count is Poisson(2 * lam * t * window); given the count the
    points are i.i.d. uniform on the truncated strip.
    """
    if lam <= 0 or t <= 0 or window <= 0:
        raise ValueError("lam, t and window must be positive")
    g = stream(seed)
    n = int(g.poisson(2.0 * lam * t * window))
    ts = g.uniform(0.0, t, size=n)
    xs = g.uniform(-window, window, size=n)
    ts, xs = _sort_directed(ts, xs)
    return PointCloud(domain=Strip(t, window), pts=np.column_stack([ts, xs]),
                      seed=seed, model=Poisson(lam), kind="directed")


def sample_uniform_disk(m: int, r: float, seed: int) -> PointCloud:
    """m i.i.d. uniform points in the disk of radius r."""
    if r <= 0:
        raise ValueError("r must be positive")
    if m < 0:
        raise ValueError("m must be nonnegative")
    g = stream(seed)
    rad = r * np.sqrt(g.uniform(0.0, 1.0, size=m))
    ang = g.uniform(0.0, 2.0 * math.pi, size=m)
    pts = np.column_stack([rad * np.cos(ang), rad * np.sin(ang)])
    return PointCloud(domain=Disk(r), pts=pts, seed=seed, model=Uniform(m),
                      kind="planar")


def sample_heavy_tail_field(alpha: float, R: float, wmin: float,
                            seed: int) -> PointCloud:
    """Poisson field of weighted points with intensity (alpha/2) w^(-alpha-1).

    Weights below wmin carry infinite total mass, so the field is truncated
    there: the count is Poisson(pi R^2 wmin^(-alpha) / 2), weights are Pareto
    with survival (w / wmin)^(-alpha), and positions are uniform on the disk
    of radius R.  Variational values computed on a truncated field are lower
    bounds for the untruncated ones.
    """
    if alpha <= 0 or R <= 0 or wmin <= 0:
        raise ValueError("alpha, R and wmin must be positive")
    g = stream(seed)
    mean = math.pi * R * R * wmin ** (-alpha) / 2.0
    n = int(g.poisson(mean))
    ws = wmin * (1.0 - g.uniform(0.0, 1.0, size=n)) ** (-1.0 / alpha)
    rad = R * np.sqrt(g.uniform(0.0, 1.0, size=n))
    ang = g.uniform(0.0, 2.0 * math.pi, size=n)
    pts = np.column_stack([ws, rad * np.cos(ang), rad * np.sin(ang)])
    return PointCloud(domain=WeightedWindow(R, wmin), pts=pts, seed=seed,
                      model=HeavyTail(alpha, wmin), kind="weighted")


# ----------------------------------------------------------------------
# measure-preserving scaling maps

def scale_holder(cloud: PointCloud, alpha: float, gamma: float) -> PointCloud:
    """(t, x) -> (alpha^(1/(1+gamma)) t, alpha^(gamma/(1+gamma)) x).

    Leaves every chain's gamma-Holder norm unchanged; domain extents scale
    with the points, seed and model metadata are preserved.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if cloud.kind != "directed":
        raise ValueError("scaling maps act on directed clouds")
    ct = alpha ** (1.0 / (1.0 + gamma))
    cx = alpha ** (gamma / (1.0 + gamma))
    return _apply_directed_scaling(cloud, ct, cx,
                                   f"scaled:holder(alpha={alpha!r},gamma={gamma!r})")


def scale_entropy(cloud: PointCloud, alpha: float, a: float,
                  b: float) -> PointCloud:
    """(t, x) -> (alpha^(a/(a+b+1)) t, alpha^((b+1)/(a+b+1)) x).

    Multiplies every chain's (a, b)-entropy, and the horizon, by exactly
    alpha^(a/(a+b+1)).
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if cloud.kind != "directed":
        raise ValueError("scaling maps act on directed clouds")
    s = a + b + 1.0
    ct = alpha ** (a / s)
    cx = alpha ** ((b + 1.0) / s)
    return _apply_directed_scaling(cloud, ct, cx,
                                   f"scaled:entropy(alpha={alpha!r},a={a!r},b={b!r})")


def _apply_directed_scaling(cloud, ct, cx, note):
    pts = cloud.pts.copy()
    pts[:, 0] *= ct
    pts[:, 1] *= cx
    if isinstance(cloud.domain, Box):
        domain = Box(cloud.domain.t * ct, cloud.domain.halfwidth * cx)
    else:
        domain = Strip(cloud.domain.t * ct, cloud.domain.window * cx)
    annotation = cloud.annotation + (";" if cloud.annotation else "") + note
    return PointCloud(domain=domain, pts=pts, seed=cloud.seed,
                      model=cloud.model, kind="directed",
                      annotation=annotation)
