"""Enumerative completion of sketches against input/output examples.

Depth-first search over components.  Every partial assignment keeps the
values its components take on all examples, so candidates for the next
component are generated as whole numpy batches.  The last two components
are solved together: for each candidate of the second-to-last component the
final instruction is found by hashing the operand that would be needed to hit
the target (``a + b = T`` gives ``a = T - b``), instead of enumerating pairs.

Prunings:

* symmetry: commutative operands in increasing (source, rotation) order, and
  two adjacent independent components in increasing order;
* dead code: every component must feed the result, so a prefix that leaves
  more unused values than the remaining components can consume is dropped;
* observational equivalence: a candidate that reproduces an existing value
  (same example values, no greater depth) is dropped, and among siblings with
  identical values and depth only a cheapest representative is kept;
* cost: a lower bound on the final cost is compared with the bound.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from hesynth.kernels import Example
from hesynth.quill import DEFAULT_COST, CostModel, Op, Operand
from hesynth.sketch import CtHole, CtRotHole, Fill, HoleAssignment, PtRef, Sketch

log = logging.getLogger(__name__)

SAT, UNSAT, BUDGET, TIMEOUT = "sat", "unsat", "budget", "timeout"
_CHUNK = 1 << 21  # elements per vectorized block


@dataclass
class SearchConfig:
    symmetry: bool = True
    observational: bool = True
    cost_bound: float | None = None
    seed: int = 0
    shuffle: bool = False  # seeded random candidate order instead of the canonical one
    node_budget: int | None = None
    deadline: float | None = None  # absolute time on ``clock``
    clock: Callable[[], float] = time.monotonic
    cost_model: CostModel = DEFAULT_COST
    min_length: int = 1
    join: bool = True  # hash-join the last two components; False enumerates them plainly

    def __post_init__(self):
        if self.node_budget is not None and self.node_budget <= 0:
            raise ValueError("node budget must be positive")
        if self.cost_bound is not None and self.cost_bound <= 0:
            raise ValueError("cost bound must be positive")
        if self.min_length < 1:
            raise ValueError("min_length must be at least 1")


@dataclass
class SearchStats:
    generated: int = 0
    pruned_symmetry: int = 0
    pruned_observational: int = 0
    pruned_examples: int = 0
    pruned_cost: int = 0
    nodes: int = 0
    elapsed: float = 0.0

    @property
    def pruned(self) -> int:
        return self.pruned_symmetry + self.pruned_observational + self.pruned_examples + self.pruned_cost

    @property
    def surviving(self) -> int:
        return self.generated - self.pruned

    def merge(self, other: "SearchStats") -> None:
        for k in ("generated", "pruned_symmetry", "pruned_observational", "pruned_examples",
                  "pruned_cost", "nodes"):
            setattr(self, k, getattr(self, k) + getattr(other, k))
        self.elapsed += other.elapsed

    def to_dict(self) -> dict:
        return {"generated": self.generated, "pruned_symmetry": self.pruned_symmetry,
                "pruned_observational": self.pruned_observational, "pruned_examples": self.pruned_examples,
                "pruned_cost": self.pruned_cost, "surviving": self.surviving, "nodes": self.nodes}


@dataclass
class SearchResult:
    status: str
    assignment: HoleAssignment | None = None
    cost: float | None = None
    stats: SearchStats = field(default_factory=SearchStats)

    def __bool__(self):
        return self.status == SAT


class _Stop(Exception):
    def __init__(self, status):
        self.status = status


class _Source:
    """A value available to later components (an input or a component result)."""

    __slots__ = ("pos", "val", "depth", "_stacks", "_masked", "_hash")

    def __init__(self, pos: int, val: np.ndarray, depth: int):
        self.pos = pos
        self.val = val
        self.depth = depth
        self._stacks = {}
        self._masked = {}

    def stack(self, dom: tuple) -> np.ndarray:
        """Rotations of the value: shape (R, E, N)."""
        s = self._stacks.get(dom)
        if s is None:
            N = self.val.shape[-1]
            idx = (np.arange(N)[None, :] + np.asarray(dom)[:, None]) % N
            s = np.ascontiguousarray(self.val[:, idx].transpose(1, 0, 2))
            self._stacks[dom] = s
        return s

    def masked(self, dom: tuple, mask: np.ndarray) -> np.ndarray:
        """Rotations restricted to the output mask, flattened per rotation: (R, E*M)."""
        s = self._masked.get(dom)
        if s is None:
            N = self.val.shape[-1]
            idx = (mask[None, :] + np.asarray(dom)[:, None]) % N
            s = self.val[:, idx].transpose(1, 0, 2).reshape(len(dom), -1)
            self._masked[dom] = np.ascontiguousarray(s)
        return s


@dataclass
class _State:
    sources: list
    fills: list
    unused: frozenset  # positions of components not yet consumed
    pairs: frozenset  # (pos, rot) rotation pairs in use
    rots: int
    lat: float
    maxdepth: int
    prev_key: tuple | None
    rows: dict = field(default_factory=dict)


@dataclass
class _Batch:
    """Candidates for one component."""

    choice: np.ndarray
    lpos: np.ndarray
    lrot: np.ndarray
    rpos: np.ndarray  # -1 for plaintext / unary
    rrot: np.ndarray
    vals: np.ndarray  # (K, E, N)
    depth: np.ndarray
    lat: np.ndarray  # accumulated arithmetic latency
    rots: np.ndarray  # accumulated rotation count
    maxdepth: np.ndarray

    def __len__(self):
        return len(self.choice)

    def take(self, idx) -> "_Batch":
        return _Batch(*(getattr(self, f)[idx] for f in self.__dataclass_fields__))


def _kind_fn(kind: str):
    return {"add": np.add, "sub": np.subtract, "mul": np.multiply}[kind]


def _domain(kind, N) -> tuple:
    return kind.domain(N).amounts


def _same_kind(a, b) -> bool:
    if isinstance(a, CtHole) and isinstance(b, CtHole):
        return True
    return isinstance(a, CtRotHole) and isinstance(b, CtRotHole) and a.rotations == b.rotations


class _Search:
    def __init__(self, sketch: Sketch, examples: Sequence[Example], mask: Sequence[int], cfg: SearchConfig):
        self.sketch = sketch
        self.cfg = cfg
        self.N = sketch.params.N
        self.t = sketch.params.t
        self.n_in = len(sketch.ct_inputs)
        self.mask = np.asarray(sorted(mask), dtype=np.int64)
        self.E = len(examples)
        self.stats = SearchStats()
        self.rng = np.random.default_rng(cfg.seed)
        self.bound = float("inf") if cfg.cost_bound is None else float(cfg.cost_bound)
        self.observational = cfg.observational and self.E > 0
        m = cfg.cost_model
        self.lat_rot = m.lat_rotate
        self.pts = {n: v.array() for n, v in sketch.pt_consts}
        self.inputs = []
        for k, ct in enumerate(sketch.ct_inputs):
            if examples:
                v = np.stack([np.asarray(ex.inputs[ct], dtype=np.int64) for ex in examples]) % self.t
            else:
                v = np.zeros((0, self.N), dtype=np.int64)
            self.inputs.append(_Source(k, v, 0))
        if examples:
            exp = np.stack([np.asarray(ex.expected, dtype=np.int64) for ex in examples]) % self.t
            self.target = exp[:, self.mask].reshape(-1)
        else:
            self.target = np.zeros(0, dtype=np.int64)
        hrng = np.random.default_rng(0x5EED)
        self.w_full = hrng.integers(1, 2**63, size=self.E * self.N, dtype=np.uint64)
        self.w_mask = hrng.integers(1, 2**63, size=self.target.size, dtype=np.uint64)
        self.min_lat = {}

    # ---------------------------------------------------------------- utils

    def _tick(self):
        self.stats.nodes += 1
        if self.cfg.node_budget is not None and self.stats.nodes > self.cfg.node_budget:
            raise _Stop(BUDGET)
        if self.cfg.deadline is not None and self.cfg.clock() > self.cfg.deadline:
            raise _Stop(TIMEOUT)

    def _hash(self, rows: np.ndarray, w: np.ndarray) -> np.ndarray:
        return (rows.astype(np.uint64) * w).sum(axis=-1, dtype=np.uint64)

    def _ref(self, pos: int):
        return self.sketch.ct_inputs[pos] if pos < self.n_in else pos - self.n_in

    def _rows(self, st: _State, dom: tuple):
        """All (source, rotation) operand rows for a domain, in canonical order."""
        r = st.rows.get(dom)
        if r is None:
            vals = np.concatenate([s.stack(dom) for s in st.sources])
            R = len(dom)
            pos = np.repeat(np.arange(len(st.sources)), R)
            rot = np.tile(np.asarray(dom, dtype=np.int64), len(st.sources))
            depth = np.repeat(np.asarray([s.depth for s in st.sources]), R)
            r = (vals, pos, rot, depth)
            st.rows[dom] = r
        return r

    def _min_latency(self, comps) -> float:
        m = self.cfg.cost_model
        return min((m.latency(c.op) for comp in comps for c in comp.choices), default=0.0)

    # ----------------------------------------------------------- expansion

    def _expand(self, j: int, st: _State, final: bool, join_level: bool = False) -> _Batch:
        """Candidates for component ``j`` that survive the prefix prunings."""
        comp = self.comps[j]
        N, t = self.N, self.t
        remaining = len(self.comps) - 1 - j
        min_rest = self.rest_lat[j]
        nsrc = len(st.sources)
        is_unused = np.zeros(nsrc + 1, dtype=bool)
        for u in st.unused:
            is_unused[u] = True
        n_unused = len(st.unused)
        pair_codes = np.asarray(sorted(p * N + r for p, r in st.pairs), dtype=np.int64)
        prev_pos = nsrc - 1 if j > 0 else -2
        m = self.cfg.cost_model
        out = []
        for ci, ch in enumerate(comp.choices):
            dom_l = _domain(ch.lhs, N)
            vl, lpos_r, lrot_r, ldep_r = self._rows(st, dom_l)
            kind = ch.op.kind
            if ch.op.is_unary:
                sel = np.nonzero(lrot_r != 0)[0]
                li = sel
                ri = np.full(len(sel), -1)
                rpos = np.full(len(sel), -1)
                rrot = np.zeros(len(sel), dtype=np.int64)
            elif ch.op.is_pt:
                li = np.arange(len(lpos_r))
                ri = np.full(len(li), -1)
                rpos = np.full(len(li), -1)
                rrot = np.zeros(len(li), dtype=np.int64)
            else:
                dom_r = _domain(ch.rhs, N)
                vr, rpos_r, rrot_r, rdep_r = self._rows(st, dom_r)
                PL, PR = len(lpos_r), len(rpos_r)
                li = np.repeat(np.arange(PL), PR)
                ri = np.tile(np.arange(PR), PL)
                rpos = rpos_r[ri]
                rrot = rrot_r[ri]
            lpos = lpos_r[li]
            lrot = lrot_r[li]
            n0 = len(li)
            self.stats.generated += n0
            keep = np.ones(n0, dtype=bool)
            lk = lpos * N + lrot
            rk = np.where(rpos >= 0, rpos * N + rrot, -1)
            if self.cfg.symmetry:
                if ch.op.commutative and _same_kind(ch.lhs, ch.rhs):
                    keep &= lk <= rk
                if st.prev_key is not None:
                    pc, plk, prk = st.prev_key
                    uses_prev = (lpos == prev_pos) | (rpos == prev_pos)
                    later = (ci > pc) | ((ci == pc) & ((lk > plk) | ((lk == plk) & (rk > prk))))
                    keep &= uses_prev | later
            # dead code
            used_l = is_unused[lpos]
            used_r = (rpos >= 0) & is_unused[np.where(rpos >= 0, rpos, nsrc)] & (rpos != lpos)
            left = n_unused - used_l.astype(int) - used_r.astype(int)
            if final:
                keep &= left == 0
            else:
                keep &= left + 1 <= remaining + 1
            self.stats.pruned_symmetry += n0 - int(keep.sum())
            sel = np.nonzero(keep)[0]
            li, ri, lpos, lrot, rpos, rrot = li[sel], ri[sel], lpos[sel], lrot[sel], rpos[sel], rrot[sel]
            # depth, latency, rotations
            ldep = ldep_r[li]
            if ch.op.is_unary or ch.op.is_pt:
                dep = ldep + (1 if ch.op is Op.MUL_CT_PT else 0)
            else:
                dep = np.maximum(ldep, rdep_r[ri]) + (1 if ch.op is Op.MUL_CT_CT else 0)
            lat = st.lat + m.latency(ch.op) if ch.op.is_arith else np.full(len(sel), st.lat)
            lat = np.broadcast_to(np.asarray(lat, dtype=float), (len(sel),)).copy()
            if ch.op is Op.ROTATE:
                rots = np.full(len(sel), st.rots + 1)
            else:
                lcode = lpos * N + lrot
                new_l = (lrot != 0) & ~np.isin(lcode, pair_codes)
                rcode = rpos * N + rrot
                new_r = (rpos >= 0) & (rrot != 0) & ~np.isin(rcode, pair_codes) & (rcode != np.where(new_l, lcode, -1))
                rots = st.rots + new_l.astype(int) + new_r.astype(int)
            maxd = np.maximum(st.maxdepth, dep)
            lb = (lat + remaining * min_rest + self.lat_rot * rots) * (1 + maxd)
            ok = lb < self.bound
            self.stats.pruned_cost += int((~ok).sum())
            sel = np.nonzero(ok)[0]
            if not len(sel):
                continue
            li, ri, lpos, lrot, rpos, rrot = li[sel], ri[sel], lpos[sel], lrot[sel], rpos[sel], rrot[sel]
            dep, lat, rots, maxd = dep[sel], lat[sel], rots[sel], maxd[sel]
            # values
            K = len(li)
            vals = np.empty((K, self.E, N), dtype=np.int64)
            if ch.op.is_unary:
                vals[:] = vl[li]
            elif ch.op.is_pt:
                np.copyto(vals, _kind_fn(kind)(vl[li], self.pts[ch.rhs.name]) % t)
            else:
                f = _kind_fn(kind)
                step = max(1, _CHUNK // max(1, self.E * N))
                for a in range(0, K, step):
                    b = min(K, a + step)
                    vals[a:b] = f(vl[li[a:b]], vr[ri[a:b]]) % t
            out.append(_Batch(np.full(K, ci), lpos, lrot, rpos, rrot, vals, dep, lat, rots, maxd))
        if not out:
            return _Batch(*(np.zeros((0,) + ((self.E, N) if k == "vals" else ()), dtype=np.int64)
                            for k in _Batch.__dataclass_fields__))
        batch = _Batch(*(np.concatenate([getattr(b, k) for b in out]) for k in _Batch.__dataclass_fields__))
        if not final and self.observational and len(batch):
            batch = self._prune_redundant(st, batch)
            if not join_level and len(batch) > 1:
                batch = self._dedupe_siblings(st, batch, comp)
        return batch

    def _prune_redundant(self, st: _State, b: _Batch) -> _Batch:
        """Drop candidates whose example values equal an existing value of no greater depth."""
        flat = b.vals.reshape(len(b), -1)
        hc = self._hash(flat, self.w_full)
        ex = np.stack([s.val.reshape(-1) for s in st.sources])
        he = self._hash(ex, self.w_full)
        hit = np.nonzero(np.isin(hc, he))[0]
        if not len(hit):
            return b
        keep = np.ones(len(b), dtype=bool)
        for k in hit:
            for e in np.nonzero(he == hc[k])[0]:
                if st.sources[e].depth <= b.depth[k] and np.array_equal(ex[e], flat[k]):
                    keep[k] = False
                    break
        self.stats.pruned_observational += int((~keep).sum())
        return b.take(np.nonzero(keep)[0])

    def _dedupe_siblings(self, st: _State, b: _Batch, comp) -> _Batch:
        """Among candidates with identical example values and depth keep dominating ones.

        ``a`` dominates ``b`` when it is no slower, adds no rotation ``b``
        does not add, and consumes at least the unused values ``b`` consumes.
        """
        flat = b.vals.reshape(len(b), -1)
        h = self._hash(flat, self.w_full)
        order = np.argsort(h, kind="stable")
        hs = h[order]
        dup = np.zeros(len(b), dtype=bool)
        dup[1:] = hs[1:] == hs[:-1]
        if not dup.any():
            return b
        N = self.N
        keep = np.ones(len(b), dtype=bool)

        def info(k):
            if comp.choices[int(b.choice[k])].op is Op.ROTATE:
                return {("explicit", int(k))}, set()
            pairs = set()
            for p, r in ((b.lpos[k], b.lrot[k]), (b.rpos[k], b.rrot[k])):
                if p >= 0 and r and (int(p), int(r)) not in st.pairs:
                    pairs.add((int(p), int(r)))
            uses = {int(p) for p in (b.lpos[k], b.rpos[k]) if p in st.unused}
            return pairs, uses

        i = 0
        n = len(order)
        while i < n:
            jx = i + 1
            while jx < n and hs[jx] == hs[i]:
                jx += 1
            if jx - i > 1:
                group = sorted(order[i:jx])
                infos = {k: info(k) for k in group}
                for x in group:
                    if not keep[x]:
                        continue
                    for y in group:
                        if y == x or not keep[y] or b.depth[x] != b.depth[y]:
                            continue
                        if not np.array_equal(flat[x], flat[y]):
                            continue
                        px, ux = infos[x]
                        py, uy = infos[y]
                        if b.lat[x] <= b.lat[y] and px <= py and ux >= uy and b.rots[x] <= b.rots[y]:
                            keep[y] = False
            i = jx
        self.stats.pruned_observational += int((~keep).sum())
        return b.take(np.nonzero(keep)[0])

    def _order(self, n: int) -> np.ndarray:
        return self.rng.permutation(n) if self.cfg.shuffle else np.arange(n)

    def _fill(self, ch_idx: int, comp, lpos, lrot, rpos, rrot) -> Fill:
        ch = comp.choices[ch_idx]
        lhs = Operand(self._ref(int(lpos)), int(lrot))
        if ch.op.is_unary:
            rhs = None
        elif ch.op.is_pt:
            rhs = ch.rhs.name
        else:
            rhs = Operand(self._ref(int(rpos)), int(rrot))
        return Fill(int(ch_idx), lhs, rhs)

    def _push(self, st: _State, j: int, b: _Batch, k: int) -> _State:
        N = self.N
        pos = len(st.sources)
        src = _Source(pos, b.vals[k], int(b.depth[k]))
        used = {int(p) for p in (b.lpos[k], b.rpos[k]) if p >= 0}
        pairs = set(st.pairs)
        for p, r in ((b.lpos[k], b.lrot[k]), (b.rpos[k], b.rrot[k])):
            if p >= 0 and r and self.comps[j].choices[int(b.choice[k])].op is not Op.ROTATE:
                pairs.add((int(p), int(r)))
        fill = self._fill(int(b.choice[k]), self.comps[j], b.lpos[k], b.lrot[k], b.rpos[k], b.rrot[k])
        key = (int(b.choice[k]), int(b.lpos[k] * N + b.lrot[k]),
               int(b.rpos[k] * N + b.rrot[k]) if b.rpos[k] >= 0 else -1)
        return _State(st.sources + [src], st.fills + [fill], frozenset((st.unused - used) | {pos}),
                      frozenset(pairs), int(b.rots[k]), float(b.lat[k]), int(b.maxdepth[k]), key)

    # -------------------------------------------------------------- search

    def run(self, length: int) -> tuple:
        self.comps = self.sketch.components[:length]
        self.rest_lat = [self._min_latency(self.comps[j + 1:]) for j in range(length)]
        st = _State(list(self.inputs), [], frozenset(), frozenset(), 0, 0.0, 0, None)
        return self._dfs(0, st)

    def _dfs(self, j: int, st: _State):
        self._tick()
        L = len(self.comps)
        if j == L - 1:
            return self._final_direct(j, st)
        if self.cfg.join and j == L - 2:
            return self._join(j, st)
        b = self._expand(j, st, final=False)
        for k in self._order(len(b)):
            res = self._dfs(j + 1, self._push(st, j, b, k))
            if res is not None:
                return res
        return None

    def _cost(self, lat, rots, maxd) -> float:
        return (lat + self.lat_rot * rots) * (1 + maxd)

    def _final_direct(self, j: int, st: _State):
        b = self._expand(j, st, final=True)
        if not len(b):
            return None
        got = b.vals[:, :, self.mask].reshape(len(b), -1)
        match = np.all(got == self.target, axis=1)
        self.stats.pruned_examples += int((~match).sum())
        order = self._order(len(b))
        for k in order:
            if match[k]:
                cost = self._cost(b.lat[k], b.rots[k], b.maxdepth[k])
                if cost >= self.bound:
                    self.stats.pruned_cost += 1
                    continue
                fill = self._fill(int(b.choice[k]), self.comps[j], b.lpos[k], b.lrot[k], b.rpos[k], b.rrot[k])
                return HoleAssignment(tuple(st.fills + [fill])), cost
        return None

    def _join(self, j: int, st: _State):
        """Solve components ``j`` (second to last) and ``j + 1`` together."""
        b = self._expand(j, st, final=False, join_level=True)
        K = len(b)
        if not K:
            return None
        N, t = self.N, self.t
        m = self.cfg.cost_model
        fin = self.comps[j + 1]
        nsrc = len(st.sources)
        cand_pos = nsrc
        # the single unused earlier component (if any) the final instruction must consume
        other = np.full(K, -1)
        for u in st.unused:
            missed = (b.lpos != u) & (b.rpos != u)
            other = np.where(missed, u, other)
        T = self.target
        EM = T.size

        def cand_pairs(k):
            if self.comps[j].choices[int(b.choice[k])].op is Op.ROTATE:
                return set()
            return {(int(p), int(r)) for p, r in ((b.lpos[k], b.lrot[k]), (b.rpos[k], b.rrot[k])) if p >= 0 and r}
        hits = []  # (k, choice, lpos, lrot, rpos, rrot)
        gen0 = self.stats.generated

        xcache: dict = {}

        def masked_cands(dom):
            if dom not in xcache:
                idx = (self.mask[None, :] + np.asarray(dom)[:, None]) % N  # (R, M)
                x = b.vals[:, :, idx]  # (K, E, R, M)
                xcache[dom] = np.ascontiguousarray(x.transpose(0, 2, 1, 3).reshape(K, len(dom), EM))
            return xcache[dom]

        def pool(dom):
            key = ("pool", dom)
            if key not in st.rows:
                rows = np.concatenate([s.masked(dom, self.mask) for s in st.sources])
                pos = np.repeat(np.arange(nsrc), len(dom))
                rot = np.tile(np.asarray(dom, dtype=np.int64), nsrc)
                h = self._hash(rows, self.w_mask)
                order = np.argsort(h)
                st.rows[key] = (rows, pos, rot, h[order], order)
            return st.rows[key]

        for fi, ch in enumerate(fin.choices):
            kind = ch.op.kind
            dom_a = _domain(ch.lhs, N)
            xa = masked_cands(dom_a)
            alone = other < 0
            if ch.op.is_unary or ch.op.is_pt:
                if ch.op.is_pt:
                    ptm = self.pts[ch.rhs.name][self.mask]
                    ptrow = np.tile(ptm, self.E)
                    vals = _kind_fn(kind)(xa, ptrow) % t
                else:
                    vals = xa
                ok = np.all(vals == T, axis=2) & alone[:, None]
                if ch.op.is_unary:
                    ok &= (np.asarray(dom_a) != 0)[None, :]
                self.stats.generated += xa.shape[0] * xa.shape[1]
                for k, ra in zip(*np.nonzero(ok)):
                    hits.append((k, fi, cand_pos, dom_a[ra], -1, 0))
                continue
            dom_b = _domain(ch.rhs, N)
            xb = xa if dom_b == dom_a else masked_cands(dom_b)
            sym = self.cfg.symmetry and ch.op.commutative and _same_kind(ch.lhs, ch.rhs)
            # (fixed lhs, candidate rhs)
            hits += self._match_fixed(kind, "fixed_lhs", xb, pool(dom_a), other, fi, cand_pos, dom_b)
            # (candidate lhs, fixed rhs); non-canonical for commutative same-kind holes
            if not sym:
                hits += self._match_fixed(kind, "fixed_rhs", xa, pool(dom_b), other, fi, cand_pos, dom_a)
            # (candidate, candidate)
            ks = np.nonzero(alone)[0]
            if len(ks):
                f = _kind_fn(kind)
                RA, RB = len(dom_a), len(dom_b)
                step = max(1, _CHUNK // max(1, RA * RB * EM))
                for a0 in range(0, len(ks), step):
                    kk = ks[a0:a0 + step]
                    v = f(xa[kk][:, :, None, :], xb[kk][:, None, :, :]) % t
                    ok = np.all(v == T, axis=3)
                    if sym:
                        ok &= np.arange(RA)[:, None] <= np.arange(RB)[None, :]
                    self.stats.generated += v.shape[0] * RA * RB
                    for kq, ra, rb in zip(*np.nonzero(ok)):
                        hits.append((kk[kq], fi, cand_pos, dom_a[ra], cand_pos, dom_b[rb]))
        self.stats.pruned_examples += self.stats.generated - gen0 - len(hits)
        if not hits:
            return None
        by_cand: dict = {}
        for h in hits:
            by_cand.setdefault(int(h[0]), []).append(h)
        for k in self._order(K):
            hs = by_cand.get(int(k))
            if not hs:
                continue
            good = []
            for h in hs:
                _, fi, lp, lr, rp, rr = h
                ch = fin.choices[fi]
                pairs = set(st.pairs) | cand_pairs(k)
                rots = int(b.rots[k])
                if ch.op is Op.ROTATE:
                    rots += 1
                else:
                    for p, r in ((lp, lr), (rp, rr)):
                        if p >= 0 and r and (int(p), int(r)) not in pairs:
                            pairs.add((int(p), int(r)))
                            rots += 1
                dl = b.depth[k] if lp == cand_pos else st.sources[lp].depth
                if ch.op.is_pt or ch.op.is_unary:
                    dfin = dl + (1 if ch.op is Op.MUL_CT_PT else 0)
                else:
                    dr = b.depth[k] if rp == cand_pos else st.sources[rp].depth
                    dfin = max(dl, dr) + (1 if ch.op is Op.MUL_CT_CT else 0)
                lat = b.lat[k] + (m.latency(ch.op) if ch.op.is_arith else 0.0)
                cost = self._cost(lat, rots, max(b.maxdepth[k], dfin))
                if cost >= self.bound:
                    self.stats.pruned_cost += 1
                    continue
                good.append((h, cost))
            if not good:
                continue
            if self.cfg.shuffle:
                h, cost = good[int(self.rng.integers(len(good)))]
            else:
                h, cost = min(good, key=lambda g: (g[0][1], g[0][2], g[0][3], g[0][4], g[0][5]))
            child = self._push(st, j, b, k)
            _, fi, lp, lr, rp, rr = h
            fill = self._fill(fi, fin, lp, lr, rp, rr)
            return HoleAssignment(tuple(child.fills + [fill])), float(cost)
        return None

    def _match_fixed(self, kind, side, x, pool, other, fi, cand_pos, dom):
        """Hits where one operand is a fixed pool row and the other a rotated candidate.

        ``x`` has shape (K, R, EM).  For ``side == "fixed_lhs"`` the pool row is
        the left operand.
        """
        t = self.t
        T = self.target
        pool_rows, pool_pos, pool_rot, hp_sorted, hp_order = pool
        K, R, EM = x.shape
        P = len(pool_rows)
        self.stats.generated += K * R * P
        out = []
        if P == 0 or K == 0:
            return out
        if kind == "mul":
            step = max(1, _CHUNK // max(1, R * P * EM))
            for a0 in range(0, K, step):
                xs = x[a0:a0 + step]
                v = (xs[:, :, None, :] * pool_rows[None, None, :, :]) % t
                ok = np.all(v == T, axis=3)
                allowed = (other[a0:a0 + step, None] < 0) | (pool_pos[None, :] == other[a0:a0 + step, None])
                ok &= allowed[:, None, :]
                for kq, r, p in zip(*np.nonzero(ok)):
                    out.append(self._hit(a0 + kq, fi, side, cand_pos, dom[r], pool_pos[p], pool_rot[p]))
            return out
        if kind == "add":
            need = (T - x) % t  # pool = T - cand either way
        elif side == "fixed_lhs":
            need = (T + x) % t  # pool - cand = T
        else:
            need = (x - T) % t  # cand - pool = T
        flat_need = need.reshape(K * R, EM)
        hn = self._hash(flat_need, self.w_mask)
        at = np.searchsorted(hp_sorted, hn)
        np.minimum(at, P - 1, out=at)
        cand = np.nonzero(hp_sorted[at] == hn)[0]
        for q in cand:
            k, r = divmod(int(q), R)
            i = int(at[q])
            while i < P and hp_sorted[i] == hn[q]:
                p = hp_order[i]
                i += 1
                if other[k] >= 0 and pool_pos[p] != other[k]:
                    continue
                if np.array_equal(pool_rows[p], flat_need[q]):
                    out.append(self._hit(k, fi, side, cand_pos, dom[r], pool_pos[p], pool_rot[p]))
        return out

    @staticmethod
    def _hit(k, fi, side, cand_pos, crot, ppos, prot):
        if side == "fixed_lhs":
            return (int(k), fi, int(ppos), int(prot), cand_pos, int(crot))
        return (int(k), fi, cand_pos, int(crot), int(ppos), int(prot))


def find_completion(sketch: Sketch, examples: Sequence[Example], cfg: SearchConfig | None = None,
                    mask: Sequence[int] | None = None) -> SearchResult:
    """Find a hole assignment whose program matches every example on ``mask``.

    Programs of ``cfg.min_length`` up to ``sketch.L`` components are
    searched, shortest first; every component of a returned program feeds
    the result.  With a cost bound only programs strictly cheaper than the
    bound qualify.
    """
    cfg = cfg or SearchConfig()
    mask = list(range(sketch.params.N)) if mask is None else list(mask)
    t0 = time.perf_counter()
    s = _Search(sketch, examples, mask, cfg)
    result = SearchResult(UNSAT, stats=s.stats)
    try:
        for length in range(cfg.min_length, sketch.L + 1):
            found = s.run(length)
            if found is not None:
                result = SearchResult(SAT, found[0], found[1], s.stats)
                break
    except _Stop as e:
        result = SearchResult(e.status, stats=s.stats)
    s.stats.elapsed = time.perf_counter() - t0
    log.debug("search %s after %d nodes (%.2fs)", result.status, s.stats.nodes, s.stats.elapsed)
    return result


def is_canonical(sketch: Sketch, a: HoleAssignment) -> bool:
    """Whether a complete assignment satisfies the canonical-form rules.

    Commutative operands are ordered, adjacent independent components are
    ordered, and every component feeds the result.
    """
    N = sketch.params.N
    n_in = len(sketch.ct_inputs)

    def pos(o: Operand) -> int:
        return sketch.ct_inputs.index(o.src) if isinstance(o.src, str) else n_in + o.src

    keys = []
    used = set()
    for j, f in enumerate(a.fills):
        ch = sketch.components[j].choices[f.choice]
        lk = pos(f.lhs) * N + f.lhs.rot % N
        rk = pos(f.rhs) * N + f.rhs.rot % N if isinstance(f.rhs, Operand) else -1
        if ch.op.commutative and _same_kind(ch.lhs, ch.rhs) and lk > rk:
            return False
        key = (f.choice, lk, rk)
        if keys:
            uses_prev = any(isinstance(o, Operand) and o.src == j - 1 for o in (f.lhs, f.rhs))
            if not uses_prev and not keys[-1] < key:
                return False
        keys.append(key)
        for o in (f.lhs, f.rhs):
            if isinstance(o, Operand) and isinstance(o.src, int):
                used.add(o.src)
    return all(k in used for k in range(len(a.fills) - 1))


def observational_prune(values: Sequence[np.ndarray], depths: Sequence[int], costs: Sequence[float]) -> list:
    """Indices of representatives after merging observationally equal candidates.

    Candidates with identical example values and identical depth are merged;
    the cheapest (first on ties) survives.
    """
    best: dict = {}
    for i, (v, d, c) in enumerate(zip(values, depths, costs)):
        key = (np.asarray(v).tobytes(), np.asarray(v).shape, int(d))
        if key not in best or c < costs[best[key]]:
            best[key] = i
    return sorted(best.values())
