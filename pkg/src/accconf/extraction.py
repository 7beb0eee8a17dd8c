"""Client-side key recovery from an enabling block and one user share.

Two paths compute the same key: the default one completes the server's
partial Lagrangian coefficients with one extra factor each; the baseline
(``precomputed=False``) ignores them and rebuilds every coefficient from
scratch. Z_Q multiplications and Z_P exponentiations are counted exactly.
"""

import time
from dataclasses import dataclass, field

from .block import decode_key, verify_block
from .errors import ExpiredError, NotInvertibleError, RevokedShareError, SignatureError
from .group import mod_inv


@dataclass
class SubkeyTrace:
    lambdas: list
    lambda_user: int
    delta1: int
    delta2: int

    @property
    def blind(self):
        return None if self.delta1 is None else self.delta1 * self.delta2


@dataclass
class ExtractionResult:
    subkeys: list
    key_bytes: bytes = None
    mult_count: int = 0
    exp_count: int = 0
    traces: list = field(default_factory=list)


class _Counted:
    """Z_Q multiply / Z_P pow with exact operation counters."""

    def __init__(self, params):
        self.Q = params.Q
        self.P = params.P
        self.mults = 0
        self.exps = 0

    def mul(self, a, b):
        self.mults += 1
        return a * b % self.Q

    def exp(self, base, e):
        self.exps += 1
        return pow(base, e, self.P)

    def frac(self, num, a, b):
        """num / (a - b) mod Q; a zero denominator means the share sits in the block."""
        try:
            return self.mul(num, mod_inv((a - b) % self.Q, self.Q))
        except NotInvertibleError:
            raise RevokedShareError("share x-coordinate is part of the enabling block") from None

    def product(self, factors):
        acc = None
        for f in factors:
            acc = f if acc is None else self.mul(acc, f)
        return 1 if acc is None else acc


def _blind_for(share_set, share, ops, precomputed):
    xs = share_set.xs
    xi = share.x
    if precomputed:
        lambdas = [ops.mul(lh, ops.frac(xi, xi, xk)) for lh, xk in zip(share_set.lambda_hats, xs)]
    else:
        lambdas = []
        for k, xk in enumerate(xs):
            terms = [ops.frac(xj, xj, xk) for j, xj in enumerate(xs) if j != k]
            terms.append(ops.frac(xi, xi, xk))
            lambdas.append(ops.product(terms))
    delta1 = 1
    for (_, y), lam in zip(share_set.pairs, lambdas):
        delta1 = delta1 * ops.exp(y, lam) % ops.P
    lambda_user = ops.product(ops.frac(xj, xj, xi) for xj in xs)
    return lambdas, lambda_user, delta1


def recover_subkeys(block, share, params, precomputed=True):
    """Unblind every gamma_b; no signature, expiry or key-framing checks."""
    if not 1 <= share.x < params.Q:
        raise ValueError("share x must lie in Z*_Q")
    ops = _Counted(params)
    cache = {}
    subkeys, traces = [], []
    for b, gamma in enumerate(block.gammas):
        ss = block.share_set(b)
        key = id(ss)
        if key not in cache:
            lambdas, lambda_user, delta1 = _blind_for(ss, share, ops, precomputed)
            delta2 = ops.exp(block.g_r, ops.mul(share.fx % params.Q, lambda_user))
            cache[key] = SubkeyTrace(lambdas, lambda_user, delta1, delta2)
        tr = cache[key]
        subkeys.append(gamma * mod_inv(tr.delta1 * tr.delta2 % params.P, params.P) % params.P)
        traces.append(tr)
    return ExtractionResult(subkeys, None, ops.mults, ops.exps, traces)


def extract(block, share, params, verify_key, now=None, precomputed=True):
    """Verify the block, recover all subkeys and reassemble the key bytes.

    ``now`` defaults to the wall clock; pass an explicit instant for reproducibility.
    """
    if not verify_block(block, verify_key, params):
        raise SignatureError("enabling block signature does not verify")
    if now is None:
        now = time.time()
    if block.is_expired(now):
        raise ExpiredError(f"enabling block expired at {block.timeout}")
    if share.expiry and now >= share.expiry:
        raise ExpiredError(f"share expired at {share.expiry}")
    result = recover_subkeys(block, share, params, precomputed)
    result.key_bytes = decode_key(result.subkeys, params)
    return result


def extract_no_precompute(block, share, params, verify_key, now=None):
    """Baseline that rebuilds every Lagrangian coefficient without the server's partial products."""
    return extract(block, share, params, verify_key, now, precomputed=False)
