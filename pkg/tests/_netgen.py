"""Random networks and a dense reference evaluator used by several test modules."""

import numpy as np

from supportnet.network import Activation, ActivationKind, Affine, Network, Pool

ANALYTIC = ["sigmoid", "tanh", "softplus", "swish", "gelu", "sin"]


def random_network(rng, d=None, relu_only=False, max_layers=4, allow_pool=True):
    d = int(rng.integers(1, 4)) if d is None else d
    width = d
    layers = []
    for _ in range(int(rng.integers(1, max_layers + 1))):
        out = int(rng.integers(1, 6)) * 2
        W = rng.normal(size=(out, width))
        W[rng.uniform(size=W.shape) < 0.3] = 0.0
        layers.append(Affine(W, rng.normal(size=out)))
        if relu_only:
            kinds = ["relu"] * out
        else:
            kinds = [str(rng.choice(["relu", "identity"] + ANALYTIC)) for _ in range(out)]
            if rng.uniform() < 0.2:
                kinds[0] = ActivationKind("polynomial", tuple(rng.normal(size=3)))
        layers.append(Activation(kinds))
        width = out
        if allow_pool and rng.uniform() < 0.4:
            layers.append(Pool())
            width //= 2
    D = int(rng.integers(1, 4))
    layers.append(Affine(rng.normal(size=(D, width)), rng.normal(size=D)))
    return Network(d, D, layers, rng.normal(size=D))


def dense_reference(net, X):
    """Row-at-a-time evaluation with dense numpy arrays (independent of the CSR path)."""
    out = []
    for x in np.asarray(X, dtype=np.float64):
        z = x.copy()
        for layer in net.layers:
            if isinstance(layer, Affine):
                z = layer.weights @ z + layer.bias
            elif isinstance(layer, Activation):
                z = np.array([k(np.array([v]))[0] for k, v in zip(layer.kinds, z)])
            else:
                m = z.shape[0] // 2
                z = z[:m] * z[m:]
        out.append(z + net.final_bias)
    return np.array(out)
