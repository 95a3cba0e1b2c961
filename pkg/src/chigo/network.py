"""Convolutional policy network, written directly on numpy.

Architecture (all convolutions stride 1, zero padding (k-1)/2 per side so
spatial size is preserved):

    input  (planes, size, size)
    conv 7x7 x K, ReLU
    6 x [conv 5x5 x K, ReLU]
    flatten
    dense 1024, ReLU
    dense size*size, softmax

Forward, backward, and the cross-entropy loss are implemented by hand;
convolution uses sliding windows + tensordot.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .encoder import NUM_PLANES

DEFAULT_FILTERS = 64
FIRST_KERNEL = 7
LATER_KERNEL = 5
NUM_CONV_LAYERS = 7
DENSE_UNITS = 1024


@dataclass(frozen=True)
class NetworkConfig:
    n_filters: int = DEFAULT_FILTERS
    board_size: int = 19
    n_planes: int = NUM_PLANES
    dense_units: int = DENSE_UNITS
    n_conv_layers: int = NUM_CONV_LAYERS
    dtype: str = "float32"

    @property
    def n_classes(self) -> int:
        return self.board_size**2

    def kernel_size(self, layer: int) -> int:
        return FIRST_KERNEL if layer == 0 else LATER_KERNEL

    def in_channels(self, layer: int) -> int:
        return self.n_planes if layer == 0 else self.n_filters

    def parameter_shapes(self) -> dict[str, tuple[int, ...]]:
        shapes: dict[str, tuple[int, ...]] = {}
        for i in range(self.n_conv_layers):
            k = self.kernel_size(i)
            shapes[f"conv{i}/W"] = (self.n_filters, self.in_channels(i), k, k)
            shapes[f"conv{i}/b"] = (self.n_filters,)
        flat = self.n_filters * self.board_size**2
        shapes["dense0/W"] = (flat, self.dense_units)
        shapes["dense0/b"] = (self.dense_units,)
        shapes["dense1/W"] = (self.dense_units, self.n_classes)
        shapes["dense1/b"] = (self.n_classes,)
        return shapes

    def to_dict(self) -> dict:
        return {
            "n_filters": self.n_filters,
            "board_size": self.board_size,
            "n_planes": self.n_planes,
            "dense_units": self.dense_units,
            "n_conv_layers": self.n_conv_layers,
            "dtype": self.dtype,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "NetworkConfig":
        return cls(**data)


def _conv_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> tuple:
    """Same-padding correlation; returns (output, padded input)."""
    k = w.shape[2]
    pad = (k - 1) // 2
    xp = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    windows = sliding_window_view(xp, (k, k), axis=(2, 3))
    out = np.tensordot(windows, w, axes=([1, 4, 5], [1, 2, 3]))
    out = out.transpose(0, 3, 1, 2) + b[None, :, None, None]
    return np.ascontiguousarray(out), xp


def _conv_backward(
    dout: np.ndarray, xp: np.ndarray, w: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gradients w.r.t. input, weights, and bias of _conv_forward."""
    k = w.shape[2]
    n, _, h, width = dout.shape
    windows = sliding_window_view(xp, (k, k), axis=(2, 3))
    dw = np.tensordot(dout, windows, axes=([0, 2, 3], [0, 2, 3]))
    db = dout.sum(axis=(0, 2, 3))
    dxp = np.zeros_like(xp)
    for i in range(k):
        for j in range(k):
            patch = np.tensordot(dout, w[:, :, i, j], axes=([1], [0]))
            dxp[:, :, i : i + h, j : j + width] += patch.transpose(0, 3, 1, 2)
    pad = (k - 1) // 2
    if pad:
        dx = dxp[:, :, pad:-pad, pad:-pad]
    else:
        dx = dxp
    return dx, dw, db


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


class Network:
    """Policy network: parameters plus forward/backward passes."""

    def __init__(self, config: NetworkConfig, params: dict[str, np.ndarray]):
        expected = config.parameter_shapes()
        if set(params) != set(expected):
            raise ValueError("parameter names do not match the architecture")
        for name, shape in expected.items():
            if params[name].shape != shape:
                raise ValueError(
                    f"{name}: expected shape {shape}, got {params[name].shape}"
                )
        self.config = config
        self.params = params

    @classmethod
    def initialize(cls, config: NetworkConfig, seed: int) -> "Network":
        """He-style initialization: normal(0, sqrt(2/fan_in)), zero biases."""
        rng = np.random.default_rng(seed)
        dtype = np.dtype(config.dtype)
        params: dict[str, np.ndarray] = {}
        for name, shape in config.parameter_shapes().items():
            if name.endswith("/b"):
                params[name] = np.zeros(shape, dtype=dtype)
            else:
                fan_in = int(np.prod(shape[1:])) if len(shape) == 4 else shape[0]
                scale = np.sqrt(2.0 / fan_in)
                params[name] = rng.normal(0.0, scale, size=shape).astype(dtype)
        return cls(config, params)

    @property
    def parameter_count(self) -> int:
        return sum(p.size for p in self.params.values())

    def copy(self) -> "Network":
        return Network(
            self.config, {name: p.copy() for name, p in self.params.items()}
        )

    def _check_features(self, features: np.ndarray) -> np.ndarray:
        cfg = self.config
        expected = (cfg.n_planes, cfg.board_size, cfg.board_size)
        if features.ndim != 4 or features.shape[1:] != expected:
            raise ValueError(
                f"features must be (batch, {cfg.n_planes}, {cfg.board_size}, "
                f"{cfg.board_size}), got {features.shape}"
            )
        return features.astype(cfg.dtype, copy=False)

    def _forward_with_cache(self, features: np.ndarray) -> tuple[np.ndarray, list]:
        x = self._check_features(features)
        cache: list = []
        for i in range(self.config.n_conv_layers):
            out, xp = _conv_forward(
                x, self.params[f"conv{i}/W"], self.params[f"conv{i}/b"]
            )
            relu_mask = out > 0
            x = out * relu_mask
            cache.append(("conv", i, xp, relu_mask))
        n = x.shape[0]
        flat = x.reshape(n, -1)
        cache.append(("flatten", x.shape))
        hidden = flat @ self.params["dense0/W"] + self.params["dense0/b"]
        relu_mask = hidden > 0
        hidden_act = hidden * relu_mask
        cache.append(("dense0", flat, relu_mask))
        logits = hidden_act @ self.params["dense1/W"] + self.params["dense1/b"]
        cache.append(("dense1", hidden_act))
        return logits, cache

    def forward(self, features: np.ndarray) -> np.ndarray:
        """Class probabilities, one row per sample, each summing to 1."""
        logits, _ = self._forward_with_cache(features)
        return softmax(logits)

    def loss_and_gradients(
        self,
        features: np.ndarray,
        labels: np.ndarray,
        sample_weights: np.ndarray | None = None,
        reduction: str = "mean",
    ) -> tuple[float, dict[str, np.ndarray]]:
        """Cross-entropy loss and its gradient for every parameter.

        With weights w_i the objective is sum_i w_i * (-ln p_i[label_i]),
        divided by the batch size when reduction is "mean".  Weighted-sum
        mode is what policy-gradient training needs.
        """
        if reduction not in ("mean", "sum"):
            raise ValueError(f"unknown reduction {reduction!r}")
        logits, cache = self._forward_with_cache(features)
        n = logits.shape[0]
        labels = np.asarray(labels, dtype=np.int64)
        if labels.shape != (n,):
            raise ValueError("labels must be one integer per sample")
        probs = softmax(logits)
        log_p = np.log(np.clip(probs[np.arange(n), labels], 1e-30, None))
        if sample_weights is None:
            weights = np.ones(n, dtype=logits.dtype)
        else:
            weights = np.asarray(sample_weights, dtype=logits.dtype)
        loss = float(-(weights * log_p).sum())
        dlogits = probs.copy()
        dlogits[np.arange(n), labels] -= 1.0
        dlogits *= weights[:, None]
        if reduction == "mean":
            loss /= n
            dlogits /= n
        grads = self._backward(dlogits, cache)
        return loss, grads

    def _backward(self, dlogits: np.ndarray, cache: list) -> dict[str, np.ndarray]:
        grads: dict[str, np.ndarray] = {}
        kind, hidden_act = cache[-1]
        assert kind == "dense1"
        grads["dense1/W"] = hidden_act.T @ dlogits
        grads["dense1/b"] = dlogits.sum(axis=0)
        dhidden = dlogits @ self.params["dense1/W"].T

        kind, flat, relu_mask = cache[-2]
        assert kind == "dense0"
        dhidden = dhidden * relu_mask
        grads["dense0/W"] = flat.T @ dhidden
        grads["dense0/b"] = dhidden.sum(axis=0)
        dflat = dhidden @ self.params["dense0/W"].T

        kind, conv_shape = cache[-3]
        assert kind == "flatten"
        dx = dflat.reshape(conv_shape)

        for kind, i, xp, relu_mask in reversed(cache[:-3]):
            assert kind == "conv"
            dout = dx * relu_mask
            dx, dw, db = _conv_backward(dout, xp, self.params[f"conv{i}/W"])
            grads[f"conv{i}/W"] = dw
            grads[f"conv{i}/b"] = db
        return grads

    def predict_moves(self, features: np.ndarray) -> np.ndarray:
        """Most probable class index per sample."""
        return self.forward(features).argmax(axis=1)
