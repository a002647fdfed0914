"""
Pair-set construction, hard pair mining and hardness-directed mixup
"""
import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from coretune.core.exceptions import ShapeError
from coretune.models.pairs import GeneratedPair, PairKind, PairSets
from coretune.utils.numkernel import as_matrix, cosine_sim_matrix, is_one_hot

logger = logging.getLogger(__name__)


def _classes(labels) -> np.ndarray:
    """Class index per sample from a label matrix or an integer vector"""
    arr = np.asarray(labels)
    if arr.ndim == 1:
        return arr.astype(np.int64)
    return np.argmax(arr, axis=1)


def _mix(a: np.ndarray, b: np.ndarray, wa: float, wb: float, what: str) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise ShapeError(f"{what} dimensions differ: {a.shape[0]} vs {b.shape[0]}")
    return wa * a + wb * b


class PairingService:
    """Algorithm-level pair bookkeeping for one batch"""

    @staticmethod
    def build_base_pairs(labels, original_positives: bool = True) -> PairSets:
        """P_i = same-class others, A_i = all others.

        With original_positives=False the positive sets start empty so that only
        generated hard positives act as positives.
        """
        labels = np.asarray(labels, dtype=np.float64)
        if labels.ndim != 2 or not is_one_hot(labels):
            raise ValueError("base pairs need one-hot labels of original samples")

        classes = _classes(labels)
        n = classes.size
        positives: List[List[int]] = []
        candidates: List[List[int]] = []
        for i in range(n):
            others = [j for j in range(n) if j != i]
            candidates.append(others)
            if original_positives:
                positives.append([j for j in others if classes[j] == classes[i]])
            else:
                positives.append([])
        return PairSets(positives=positives, candidates=candidates, pool_size=n)

    @staticmethod
    def hardest_positive(sim: np.ndarray, labels, i: int) -> Optional[int]:
        """Same-class sample least similar to anchor i; smallest index on ties"""
        classes = _classes(labels)
        mask = classes == classes[i]
        mask[i] = False
        candidates = np.flatnonzero(mask)
        if candidates.size == 0:
            return None
        return int(candidates[np.argmin(sim[i, candidates])])

    @staticmethod
    def hardest_negative(sim: np.ndarray, labels, i: int) -> Optional[int]:
        """Other-class sample most similar to anchor i; smallest index on ties"""
        classes = _classes(labels)
        candidates = np.flatnonzero(classes != classes[i])
        if candidates.size == 0:
            return None
        return int(candidates[np.argmax(sim[i, candidates])])

    @staticmethod
    def sample_lambda(alpha: float, clip_min: float, rng: np.random.Generator) -> float:
        """Beta(alpha, alpha) through two Gamma(alpha, 1) draws, clamped below at clip_min"""
        if alpha <= 0:
            raise ValueError("alpha must be positive")
        g1 = rng.standard_gamma(alpha)
        g2 = rng.standard_gamma(alpha)
        total = g1 + g2
        # both draws can underflow for very small alpha
        u = 0.5 if total == 0.0 else g1 / total
        return float(max(u, clip_min))

    @staticmethod
    def gen_hard_positive(
        z_hp,
        y_hp,
        z_hn,
        y_hn,
        lam: float,
        anchor: Optional[int] = None,
        constituents: Optional[Tuple[int, int]] = None,
    ) -> GeneratedPair:
        """z+ = lam * z_hp + (1 - lam) * z_hn, same mix for the labels"""
        return GeneratedPair(
            feature=_mix(z_hp, z_hn, lam, 1.0 - lam, "feature"),
            label=_mix(y_hp, y_hn, lam, 1.0 - lam, "label"),
            kind=PairKind.HARD_POSITIVE,
            lam=lam,
            anchor=anchor,
            constituents=constituents,
        )

    @staticmethod
    def gen_hard_negative(
        z_i,
        y_i,
        z_n,
        y_n,
        lam: float,
        anchor: Optional[int] = None,
        constituents: Optional[Tuple[int, int]] = None,
    ) -> GeneratedPair:
        """z- = (1 - lam) * z_i + lam * z_n, same mix for the labels"""
        return GeneratedPair(
            feature=_mix(z_i, z_n, 1.0 - lam, lam, "feature"),
            label=_mix(y_i, y_n, 1.0 - lam, lam, "label"),
            kind=PairKind.HARD_NEGATIVE,
            lam=lam,
            anchor=anchor,
            constituents=constituents,
        )

    @staticmethod
    def generate_hard_pairs(
        z,
        labels,
        lambda_n: float,
        lambda_p: float,
        alpha: float,
        beta_rng: np.random.Generator,
        pairing_rng: np.random.Generator,
    ) -> List[GeneratedPair]:
        """Hard positive and semi-hard negative per anchor, in anchor order.

        Each anchor consumes two Beta draws and one uniform draw whether or not its
        pairs can be formed.
        """
        z = as_matrix(z, "encoder features")
        labels = np.asarray(labels, dtype=np.float64)
        classes = _classes(labels)
        sim = cosine_sim_matrix(z)

        generated: List[GeneratedPair] = []
        for i in range(z.shape[0]):
            lam_pos = PairingService.sample_lambda(alpha, lambda_p, beta_rng)
            lam_neg = PairingService.sample_lambda(alpha, lambda_n, beta_rng)
            u = pairing_rng.random()

            hp = PairingService.hardest_positive(sim, classes, i)
            hn = PairingService.hardest_negative(sim, classes, i)
            if hp is not None and hn is not None:
                generated.append(
                    PairingService.gen_hard_positive(
                        z[hp], labels[hp], z[hn], labels[hn], lam_pos,
                        anchor=i, constituents=(hp, hn),
                    )
                )

            negatives = np.flatnonzero(classes != classes[i])
            if negatives.size:
                neg = int(negatives[min(int(u * negatives.size), negatives.size - 1)])
                generated.append(
                    PairingService.gen_hard_negative(
                        z[i], labels[i], z[neg], labels[neg], lam_neg,
                        anchor=i, constituents=(i, neg),
                    )
                )

        logger.debug(f"Generated {len(generated)} hard pairs for {z.shape[0]} anchors")
        return generated

    @staticmethod
    def gen_manifold_mix(
        z,
        labels,
        alpha: float,
        beta_rng: np.random.Generator,
        pairing_rng: np.random.Generator,
    ) -> List[GeneratedPair]:
        """Plain feature-level mixup with a random partner: one lambda per batch"""
        z = as_matrix(z, "encoder features")
        labels = np.asarray(labels, dtype=np.float64)
        lam = PairingService.sample_lambda(alpha, 0.0, beta_rng)
        partner = pairing_rng.permutation(z.shape[0])

        generated = []
        for i in range(z.shape[0]):
            j = int(partner[i])
            generated.append(
                GeneratedPair(
                    feature=lam * z[i] + (1.0 - lam) * z[j],
                    label=lam * labels[i] + (1.0 - lam) * labels[j],
                    kind=PairKind.MIX,
                    lam=lam,
                    anchor=i,
                    constituents=(i, j),
                )
            )
        return generated

    @staticmethod
    def augment_pair_sets(base: PairSets, generated: Sequence[GeneratedPair]) -> PairSets:
        """Append generated pairs to the pool after the originals.

        A hard positive joins P_i and A_i of its own anchor, a hard negative joins A_i
        only; mixes occupy pool slots but join no set.
        """
        positives = [list(p) for p in base.positives]
        candidates = [list(a) for a in base.candidates]
        offset = base.pool_size
        for g, pair in enumerate(generated):
            index = offset + g
            if pair.anchor is None or pair.kind == PairKind.MIX:
                continue
            if pair.kind == PairKind.HARD_POSITIVE:
                positives[pair.anchor].append(index)
                candidates[pair.anchor].append(index)
            elif pair.kind == PairKind.HARD_NEGATIVE:
                candidates[pair.anchor].append(index)
        return PairSets(
            positives=positives,
            candidates=candidates,
            pool_size=base.pool_size + len(generated),
        )

    @staticmethod
    def remix_features(z, generated: Sequence[GeneratedPair]) -> np.ndarray:
        """Recompute generated features from current encoder outputs"""
        z = as_matrix(z, "encoder features")
        out = np.zeros((len(generated), z.shape[1]))
        for g, pair in enumerate(generated):
            a, b = pair.constituents
            wa, wb = pair.weights
            out[g] = wa * z[a] + wb * z[b]
        return out


build_base_pairs = PairingService.build_base_pairs
hardest_positive = PairingService.hardest_positive
hardest_negative = PairingService.hardest_negative
sample_lambda = PairingService.sample_lambda
gen_hard_positive = PairingService.gen_hard_positive
gen_hard_negative = PairingService.gen_hard_negative
generate_hard_pairs = PairingService.generate_hard_pairs
gen_manifold_mix = PairingService.gen_manifold_mix
augment_pair_sets = PairingService.augment_pair_sets
remix_features = PairingService.remix_features
