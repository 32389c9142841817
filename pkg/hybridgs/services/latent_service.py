"""
Attribute dimensionality reduction.

Color (DC + SH, 48 channels) shares one latent and decoder; rotation (4
channels) has its own. PCA is the optimal linear autoencoder, so the
nonlinear decoder fit starts from the PCA solution and descends on the
attribute reconstruction loss.
"""
import logging
from typing import Optional

import numpy as np

from hybridgs.core.errors import DataError, DivergenceError, InsufficientDataError, ShapeError
from hybridgs.models import LatentModel, PcaResult
from hybridgs.schemas.encode_config import LatentConfig

logger = logging.getLogger(__name__)

# Margin keeping shifted latents strictly inside the active side of relu
RELU_MARGIN = 0.1

# A backtracking fit stops once halving shrinks the step below this
MIN_STEP = 1e-12


def pca_fit(X: np.ndarray, q: int) -> PcaResult:
    """
    Rank-q PCA of the rows of X.

    Args:
        X: n x d data
        q: Retained components, 1 <= q <= min(n, d)

    Returns:
        PcaResult with mean, d x q components and all singular values

    Raises:
        InsufficientDataError: If n < 2
        DataError: If q is out of range
    """
    X = np.asarray(X, dtype=np.float64)
    n, d = X.shape
    if n < 2:
        raise InsufficientDataError(f"PCA needs at least 2 rows, got {n}")
    if not 1 <= q <= min(n, d):
        raise DataError(f"q must be in [1, {min(n, d)}], got {q}")

    mean = X.mean(axis=0)
    _, s, vt = np.linalg.svd(X - mean, full_matrices=False)
    return PcaResult(mean=mean, components=vt[:q].T.copy(), singular_values=s)


def reconstruction_error(X: np.ndarray, pca: PcaResult) -> float:
    """||X0 - U1 U1^T X0||_F^2"""
    X = np.asarray(X, dtype=np.float64)
    return float(np.sum((pca.decode(pca.encode(X)) - X) ** 2))


def energy_spectrum(X: np.ndarray) -> np.ndarray:
    """
    Fraction of variance carried by each principal direction.

    Returns:
        d-vector of normalized squared singular values summing to 1; constant
        data puts all of its (zero) energy on the first entry
    """
    X = np.asarray(X, dtype=np.float64)
    n, d = X.shape
    if n < 2:
        raise InsufficientDataError(f"spectrum needs at least 2 rows, got {n}")
    s = np.linalg.svd(X - X.mean(axis=0), compute_uv=False)
    energy = np.zeros(d)
    energy[:s.size] = s ** 2
    total = energy.sum()
    if total == 0:
        energy[0] = 1.0
        return energy
    return energy / total


def decode_latent(Z: np.ndarray, model: LatentModel) -> np.ndarray:
    """
    act(Z W1 + b1) W2 + b2, row-wise.

    Raises:
        ShapeError: If Z's width does not match the model
    """
    Z = np.asarray(Z, dtype=np.float64)
    if Z.ndim != 2 or Z.shape[1] != model.k:
        raise ShapeError(f"latents: expected (n, {model.k}), got {Z.shape}")
    A = Z @ model.W1 + model.b1
    H = np.maximum(A, 0.0) if model.activation == "relu" else A
    return H @ model.W2 + model.b2


def latent_loss_and_gradients(
    X: np.ndarray,
    Z: np.ndarray,
    model: LatentModel,
) -> tuple[float, dict[str, np.ndarray]]:
    """
    Fit objective (1/2n)||decode(Z) - X||_F^2 and its analytic gradients.

    Returns:
        (loss, {"Z", "W1", "b1", "W2", "b2"} gradients)
    """
    n = X.shape[0]
    A = Z @ model.W1 + model.b1
    if model.activation == "relu":
        H = np.maximum(A, 0.0)
    else:
        H = A
    R = H @ model.W2 + model.b2 - X
    loss = 0.5 * float(np.sum(R * R)) / n

    dY = R / n
    dH = dY @ model.W2.T
    dA = dH * (A > 0) if model.activation == "relu" else dH
    grads = {
        "W2": H.T @ dY,
        "b2": dY.sum(axis=0),
        "W1": Z.T @ dA,
        "b1": dA.sum(axis=0),
        "Z": dA @ model.W1.T,
    }
    return loss, grads


def init_latent_decoder(
    X: np.ndarray,
    k: int,
    config: LatentConfig,
) -> tuple[np.ndarray, LatentModel]:
    """
    Warm start at the PCA reconstruction.

    The first k hidden units carry the PCA decoder exactly: for relu the
    latents are shifted into the positive half so relu acts as the identity on
    the data. Remaining hidden units get seeded noise on their input weights
    and zero output weights, so the start reproduces PCA and gradients can
    still recruit them.
    """
    X = np.asarray(X, dtype=np.float64)
    n, d = X.shape
    if config.hidden < k:
        raise DataError(f"hidden units ({config.hidden}) must be at least k ({k})")
    rng = np.random.default_rng(config.seed)

    q = min(k, n, d)
    mean = X.mean(axis=0)
    if n >= 2:
        pca = pca_fit(X, q)
        U1 = pca.components
    else:
        U1 = np.eye(d)[:, :q]
    Z = np.zeros((n, k))
    Z[:, :q] = (X - mean) @ U1

    W1 = np.zeros((k, config.hidden))
    W1[:k, :k] = np.eye(k)
    W1[:, k:] = config.noise * rng.standard_normal((k, config.hidden - k))
    b1 = np.zeros(config.hidden)
    W2 = np.zeros((config.hidden, d))
    W2[:q] = U1.T
    b2 = mean.copy()

    if config.activation == "relu":
        shift = np.maximum(0.0, -Z.min(axis=0)) + RELU_MARGIN
        b1[:k] = shift
        b2 = mean - shift @ W2[:k]

    return Z, LatentModel(W1=W1, b1=b1, W2=W2, b2=b2, activation=config.activation)


def _descend(X: np.ndarray, Z: np.ndarray, model: LatentModel, grads: dict, step: float):
    """One gradient step: mean gradient for the decoder, per-row gradient for latents."""
    n = X.shape[0]
    moved = LatentModel(
        W1=model.W1 - step * grads["W1"],
        b1=model.b1 - step * grads["b1"],
        W2=model.W2 - step * grads["W2"],
        b2=model.b2 - step * grads["b2"],
        activation=model.activation,
    )
    Z_moved = Z - step * n * grads["Z"]
    loss, moved_grads = latent_loss_and_gradients(X, Z_moved, moved)
    return Z_moved, moved, loss, moved_grads


def fit_latent_decoder(
    X: np.ndarray,
    k: int,
    config: Optional[LatentConfig] = None,
) -> tuple[np.ndarray, LatentModel]:
    """
    Jointly fit latents and a one-hidden-layer decoder to X.

    Full-batch gradient descent with a fixed step, starting at the PCA
    solution. Decoder weights follow the mean gradient; each latent row
    follows its own per-row gradient. With config.backtracking an epoch that
    would raise the loss (or make it non-finite) is discarded and the step
    halved instead, so the fitted loss never exceeds the PCA starting loss.

    Args:
        X: n x d attributes
        k: Latent width, 1 <= k <= n
        config: Fit settings (hidden, activation, epochs, step_size, seed, backtracking)

    Returns:
        (n x k latents, LatentModel)

    Raises:
        DataError: If k is out of range
        DivergenceError: If the loss becomes non-finite (only the starting
            loss when backtracking)
    """
    config = config or LatentConfig()
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    if not 1 <= k <= n:
        raise DataError(f"latent width k must be in [1, {n}], got {k}")

    Z, model = init_latent_decoder(X, k, config)
    loss, grads = latent_loss_and_gradients(X, Z, model)
    if not np.isfinite(loss):
        raise DivergenceError("latent fit starts from a non-finite loss")

    step = config.step_size
    if not config.backtracking:
        for epoch in range(1, config.epochs + 1):
            Z, model, loss, grads = _descend(X, Z, model, grads, step)
            if not np.isfinite(loss):
                raise DivergenceError(
                    f"latent fit diverged at epoch {epoch} (non-finite loss); "
                    f"try a smaller step_size than {step:g}"
                )
    else:
        rejected = 0
        for _ in range(config.epochs):
            if step < MIN_STEP:
                break
            trial = _descend(X, Z, model, grads, step)
            if not np.isfinite(trial[2]) or trial[2] > loss:
                step /= 2
                rejected += 1
                continue
            Z, model, loss, grads = trial
        if rejected:
            logger.debug(f"[LATENT] Step halved {rejected} times, final step {step:.3g}")

    logger.info(
        f"[LATENT] Fitted k={k} decoder for d={X.shape[1]} over {config.epochs} epochs, "
        f"loss {loss:.6g}"
    )
    return Z, model
