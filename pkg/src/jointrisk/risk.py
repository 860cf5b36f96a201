"""Joint risk of two binary outcomes."""
from dataclasses import dataclass

import numpy as np

__all__ = ["JointRisk", "joint_to_marginals", "product_joint"]

TARGETS = ("P11", "P10", "P01")
MARGINAL_TARGETS = ("PY1", "PY2")


@dataclass
class JointRisk:
    """Probabilities of the four outcome combinations.

    Components are scalars or equal-length arrays (one entry per row).
    """

    p11: np.ndarray
    p10: np.ndarray
    p01: np.ndarray
    p00: np.ndarray

    @classmethod
    def from_array(cls, arr):
        arr = np.asarray(arr, dtype=float)
        return cls(arr[..., 0], arr[..., 1], arr[..., 2], arr[..., 3])

    def as_array(self):
        """Shape (n, 4) in the order p11, p10, p01, p00."""
        return np.stack(
            [np.asarray(v, dtype=float) for v in (self.p11, self.p10, self.p01, self.p00)],
            axis=-1,
        )

    @property
    def marginal1(self):
        return self.p11 + self.p10

    @property
    def marginal2(self):
        return self.p11 + self.p01

    def __len__(self):
        return np.size(self.p11)

    def __getitem__(self, idx):
        return JointRisk(self.p11[idx], self.p10[idx], self.p01[idx], self.p00[idx])

    def target(self, name):
        return {
            "P11": self.p11,
            "P10": self.p10,
            "P01": self.p01,
            "P00": self.p00,
            "PY1": self.marginal1,
            "PY2": self.marginal2,
        }[name]

    def is_valid(self, atol=1e-9):
        arr = self.as_array()
        return bool(
            np.all(arr >= -atol)
            and np.all(arr <= 1 + atol)
            and np.allclose(arr.sum(axis=-1), 1.0, rtol=0.0, atol=atol)
        )


def joint_to_marginals(j):
    return j.p11 + j.p10, j.p11 + j.p01


def product_joint(p1, p2):
    """Joint risk under conditional independence of the two outcomes."""
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    q1, q2 = 1.0 - p1, 1.0 - p2
    return JointRisk(p1 * p2, p1 * q2, q1 * p2, q1 * q2)
