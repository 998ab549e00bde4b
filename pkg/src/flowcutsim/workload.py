"""Traffic generators: CDF-sampled random-partner traffic, permutation,
all-to-all, and explicit pair lists.

Generators are deterministic functions of (parameters, seed). The closed-loop
generators (random-uniform, all-to-all) hand out follow-up flows through
`on_complete`, which the runner calls at flow completion time.
"""

import bisect
import os
import random

from .util import derive_seed

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")


class WorkloadError(ValueError):
    pass


class SizeDistribution:
    """Inverse-CDF sampler over (size_bytes, cumulative_probability) knees."""

    def __init__(self, name, points):
        if not points:
            raise WorkloadError("CDF %r has no points" % (name,))
        sizes = [s for s, _ in points]
        probs = [p for _, p in points]
        if any(b <= a for a, b in zip(sizes, sizes[1:])):
            raise WorkloadError("CDF %r sizes must be strictly increasing" % (name,))
        if any(b <= a for a, b in zip(probs, probs[1:])):
            raise WorkloadError("CDF %r probabilities must be strictly increasing" % (name,))
        if not all(0.0 < p <= 1.0 for p in probs) or abs(probs[-1] - 1.0) > 1e-9:
            raise WorkloadError("CDF %r must end at cumulative probability 1.0" % (name,))
        if sizes[0] < 1:
            raise WorkloadError("CDF %r sizes must be >= 1 byte" % (name,))
        self.name = name
        self.sizes = sizes
        self.probs = probs
        self.probs[-1] = 1.0

    def sample(self, rng):
        u = rng.random()
        i = bisect.bisect_left(self.probs, u)
        if i == 0:
            return self.sizes[0]
        p0, p1 = self.probs[i - 1], self.probs[i]
        s0, s1 = self.sizes[i - 1], self.sizes[i]
        frac = (u - p0) / (p1 - p0)
        return max(1, int(round(s0 + (s1 - s0) * frac)))

    def mean(self):
        """Analytic mean of the sampled distribution (mass at the first knee,
        uniform interpolation between knees)."""
        m = self.probs[0] * self.sizes[0]
        for i in range(1, len(self.sizes)):
            m += (self.probs[i] - self.probs[i - 1]) * \
                 (self.sizes[i - 1] + self.sizes[i]) / 2.0
        return m

    @property
    def min_size(self):
        return self.sizes[0]

    @property
    def max_size(self):
        return self.sizes[-1]


def parse_cdf(text, name="<cdf>"):
    """Plain text: one `size_bytes cumulative_probability` pair per line,
    `#` starts a comment."""
    points = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise WorkloadError("%s:%d: expected 'size probability'" % (name, lineno))
        try:
            size = int(float(parts[0]))
            prob = float(parts[1])
        except ValueError:
            raise WorkloadError("%s:%d: malformed numbers" % (name, lineno)) from None
        points.append((size, prob))
    return SizeDistribution(name, points)


def load_cdf(name_or_path):
    """Bundled CDF by name (websearch, enterprise, alibaba, datamining, ...)
    or any filesystem path."""
    path = name_or_path
    if not os.path.exists(path):
        bundled = os.path.join(DATA_DIR, name_or_path + ".cdf")
        if os.path.exists(bundled):
            path = bundled
        else:
            raise WorkloadError("CDF %r not found (no such file or bundled name)"
                                % (name_or_path,))
    with open(path) as fh:
        return parse_cdf(fh.read(), os.path.basename(path))


def _random_matching(hosts, rng, forbid):
    """Random perfect matching with no fixed points, avoiding forbidden pairs.

    Greedy with restart; deterministic for a given rng state.
    """
    for _ in range(1000):
        pool = list(hosts)
        rng.shuffle(pool)
        out = {}
        dead = False
        for h in hosts:
            choices = [i for i, r in enumerate(pool) if not forbid(h, r)]
            if not choices:
                dead = True
                break
            out[h] = pool.pop(choices[rng.randrange(len(choices))])
        if not dead:
            return out
    raise WorkloadError("could not build a valid permutation "
                        "(constraints too tight?)")


class Workload:
    name = "base"

    def initial_flows(self):
        raise NotImplementedError

    def on_complete(self, src):
        """Follow-up flows for the source of a just-completed flow."""
        return ()

    @property
    def max_concurrent_per_host(self):
        return 1


class PermutationWorkload(Workload):
    """Each host sends one fixed-size flow to a distinct partner, no self-send.
    On fat trees, same-ToR partners are excluded so traffic crosses the
    aggregation level."""

    name = "permutation"

    def __init__(self, hosts, message_bytes, seed, group_of=None):
        if len(hosts) < 2:
            raise WorkloadError("permutation needs at least 2 hosts")
        self.hosts = list(hosts)
        self.message_bytes = message_bytes
        rng = random.Random(derive_seed(seed, "permutation"))
        if group_of is None:
            forbid = lambda h, r: r == h
        else:
            forbid = lambda h, r: r == h or group_of[h] == group_of[r]
        self.partner = _random_matching(self.hosts, rng, forbid)

    def initial_flows(self):
        return [(h, self.partner[h], self.message_bytes) for h in self.hosts]


class AllToAllWorkload(Workload):
    """Every ordered pair exchanges one message. Per source, destinations are
    launched sequentially in rotation order src -> src+k (mod N), k=1..N-1,
    which avoids synchronized incast."""

    name = "all_to_all"

    def __init__(self, hosts, message_bytes):
        if len(hosts) < 2:
            raise WorkloadError("all-to-all needs at least 2 hosts")
        self.hosts = list(hosts)
        self.index = {h: i for i, h in enumerate(self.hosts)}
        self.message_bytes = message_bytes
        self.next_k = {h: 1 for h in self.hosts}

    def _flow(self, src):
        n = len(self.hosts)
        k = self.next_k[src]
        if k >= n:
            return None
        self.next_k[src] = k + 1
        dst = self.hosts[(self.index[src] + k) % n]
        return (src, dst, self.message_bytes)

    def initial_flows(self):
        return [self._flow(h) for h in self.hosts]

    def on_complete(self, src):
        nxt = self._flow(src)
        return (nxt,) if nxt is not None else ()


class RandomUniformWorkload(Workload):
    """Closed loop: each host repeatedly picks a random partner and a
    CDF-sampled size, starting the next flow when the previous completes."""

    name = "random_uniform"

    def __init__(self, hosts, dist, flows_per_host, seed, group_of=None):
        if len(hosts) < 2:
            raise WorkloadError("random-uniform needs at least 2 hosts")
        if flows_per_host < 1:
            raise WorkloadError("flows_per_host must be >= 1")
        self.hosts = list(hosts)
        self.dist = dist
        self.flows_per_host = flows_per_host
        self.group_of = group_of
        self.rngs = {h: random.Random(derive_seed(seed, "uniform", h))
                     for h in self.hosts}
        self.issued = {h: 0 for h in self.hosts}

    def _draw(self, src):
        rng = self.rngs[src]
        while True:
            dst = self.hosts[rng.randrange(len(self.hosts))]
            if dst == src:
                continue
            if self.group_of is not None and self.group_of[src] == self.group_of[dst]:
                continue
            break
        return (src, dst, self.dist.sample(rng))

    def _next(self, src):
        if self.issued[src] >= self.flows_per_host:
            return None
        self.issued[src] += 1
        return self._draw(src)

    def initial_flows(self):
        return [self._next(h) for h in self.hosts]

    def on_complete(self, src):
        nxt = self._next(src)
        return (nxt,) if nxt is not None else ()


class FixedPairsWorkload(Workload):
    """Explicit (src, dst) pairs, all launched at t=0; smoke and edge cases."""

    name = "fixed_pairs"

    def __init__(self, pairs, message_bytes):
        if not pairs:
            raise WorkloadError("fixed_pairs needs at least one pair")
        for s, d in pairs:
            if s == d:
                raise WorkloadError("self-send pair %r" % ((s, d),))
        self.pairs = list(pairs)
        self.message_bytes = message_bytes

    def initial_flows(self):
        return [(s, d, self.message_bytes) for s, d in self.pairs]

    @property
    def max_concurrent_per_host(self):
        counts = {}
        for s, _ in self.pairs:
            counts[s] = counts.get(s, 0) + 1
        return max(counts.values())
