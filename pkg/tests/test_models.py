"""Reward models: losses, training behavior, checkpoints."""

import numpy as np
import pytest

from planeseek import (
    AugmentConfig,
    GPSRReward,
    ImageVAE,
    MIGPSRReward,
    PTRReward,
    load_model,
    save_model,
)
from planeseek.autodiff import Tensor
from planeseek.models.common import pair_logit_prob, vae_elbo_terms
from planeseek.nets import VaeNet
from tests.test_demos import make_demo


def monotone_demo(n=24, rng=None, side=6):
    """Walk straight toward the origin: time order equals distance order."""
    rng = rng or np.random.default_rng(0)
    frames = []
    poses = [np.array([n - 1 - i, 0, 0, 0, 0, 0], dtype=float) for i in range(n)]
    images = []
    for p in poses:
        img = np.zeros((side, side))
        img[int(p[0]) % side, int(p[0]) // side % side] = 1.0
        images.append(img)
    from planeseek import Demonstration, Frame

    return Demonstration(
        frames=[
            Frame(image=im, pose=p, timestamp=float(t))
            for t, (im, p) in enumerate(zip(images, poses))
        ],
        source_id="mono",
    )


def grid_demos(rng, n_demos=3, n_frames=20, side=8):
    """Small synthetic demos with distinct one-hot-ish images per cell."""
    from planeseek import Demonstration, Frame

    demos = []
    for k in range(n_demos):
        x = rng.integers(0, side, size=n_frames)
        y = rng.integers(0, side, size=n_frames)
        x[-1], y[-1] = side // 2, side // 2
        frames = []
        for t in range(n_frames):
            img = np.zeros((side, side))
            img[y[t], x[t]] = 1.0
            frames.append(
                Frame(
                    image=img,
                    pose=np.array([x[t], y[t], 0, 0, 0, 0], dtype=float),
                    timestamp=float(t),
                )
            )
        demos.append(Demonstration(frames=frames, source_id=f"g{k}"))
    return demos


def test_kl_identities():
    rng = np.random.default_rng(0)
    net = VaeNet(16, (8, 4), 3, rng)
    x = Tensor(rng.random((5, 16)))
    # force q = N(0, I): zero heads
    net.mu_head.w.data[:] = 0
    net.mu_head.b.data[:] = 0
    net.logvar_head.w.data[:] = 0
    net.logvar_head.b.data[:] = 0
    _, kl = vae_elbo_terms(net, x, rng)
    assert kl.item() == pytest.approx(0.0, abs=1e-12)
    # q = N(mu, 1) univariate per dim: KL = mu^2 / 2 summed
    net.mu_head.b.data[:] = 2.0
    _, kl = vae_elbo_terms(net, x, rng)
    assert kl.item() == pytest.approx(3 * (2.0**2) / 2, abs=1e-12)


def test_pair_logit_prob_values():
    r1 = Tensor(np.array([[0.3]]))
    r2 = Tensor(np.array([[0.3]]))
    assert pair_logit_prob(r1, r2).data[0, 0] == pytest.approx(0.5)
    r3 = Tensor(np.array([[0.5]]))
    p = pair_logit_prob(r1, r3, gain=10.0)
    assert p.data[0, 0] == pytest.approx(1 / (1 + np.exp(-2.0)), abs=1e-12)
    assert p.data[0, 0] == pytest.approx(0.8808, abs=1e-4)


def test_vae_requires_enough_images():
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError):
        ImageVAE(min_images=100).fit(rng.random((10, 6, 6)))


def test_vae_learns_constant_dataset():
    rng = np.random.default_rng(0)
    images = np.full((120, 6, 6), 0.25) + rng.normal(0, 0.003, (120, 6, 6))
    images = np.clip(images, 0, 1)
    vae = ImageVAE(latent=4, hidden=(16, 8), lr=3e-3, epochs=30, batch=16, seed=0)
    vae.fit(images)
    recon = vae.reconstruct(images[:8])
    assert np.mean(np.abs(recon - images[:8])) < 0.05
    assert vae.history_["loss"][-1] < vae.history_["loss"][0]


def test_ptr_orders_monotone_demo():
    demo = monotone_demo()
    model = PTRReward(
        latent=8, hidden=(32, 16), lr=2e-3, epochs=6, batch=8,
        pairs_per_epoch=600, seed=0,
    )
    model.fit([demo])
    r_first = model.predict(demo.frames[0].image)
    r_last = model.predict(demo.frames[-1].image)
    assert r_last > r_first


def test_ptr_empty_pairs_rejected():
    with pytest.raises(ValueError):
        PTRReward().fit([])


def test_gpsr_requires_pretrained_vae():
    rng = np.random.default_rng(0)
    demos = grid_demos(rng)
    with pytest.raises(ValueError) as err:
        GPSRReward(vae=None).fit(demos)
    assert "VAE" in str(err.value)


def test_gpsr_vae_resolution_must_match():
    rng = np.random.default_rng(0)
    demos = grid_demos(rng, side=8)
    vae = ImageVAE(latent=4, hidden=(16, 8), min_images=2, epochs=2, seed=0)
    vae.fit(rng.random((20, 6, 6)))
    with pytest.raises(ValueError):
        GPSRReward(vae=vae).fit(demos)


def test_reward_models_deterministic_and_in_range():
    rng = np.random.default_rng(1)
    demos = grid_demos(rng)
    images = np.concatenate([d.images() for d in demos])
    vae = ImageVAE(latent=8, hidden=(32, 16), min_images=2, epochs=4, batch=16, seed=3)
    vae.fit(images)
    model = GPSRReward(vae=vae, lr=2e-3, epochs=2, batch=8, pairs_per_epoch=400, seed=3)
    model.fit(demos)
    r1 = model.predict(images)
    r2 = model.predict(images)
    assert np.array_equal(r1, r2)
    assert np.all((r1 >= 0) & (r1 <= 1))


def test_predict_resolution_mismatch_rejected():
    rng = np.random.default_rng(1)
    demos = grid_demos(rng, side=8)
    model = PTRReward(latent=4, hidden=(16, 8), lr=1e-3, epochs=1, batch=8,
                      pairs_per_epoch=80, seed=0).fit(demos)
    with pytest.raises(ValueError) as err:
        model.predict(np.zeros((6, 6)))
    assert "(8, 8)" in str(err.value) and "(6, 6)" in str(err.value)


def test_migpsr_ignores_domain_encoder_at_inference():
    rng = np.random.default_rng(2)
    demos = grid_demos(rng)
    model = MIGPSRReward(
        latent=8, hidden=(32, 16), critic_hidden=(16, 8), lr=1e-3,
        epochs=1, batch=8, pairs_per_epoch=160, seed=0,
    )
    model.fit(demos)
    img = demos[0].frames[0].image
    before = model.predict(img)
    for layer in model.enc_d_.layers:
        layer.w.data += 123.0
    assert model.predict(img) == before


def test_migpsr_histories_record_three_losses():
    rng = np.random.default_rng(3)
    demos = grid_demos(rng)
    model = MIGPSRReward(
        latent=8, hidden=(32, 16), critic_hidden=(16, 8), lr=1e-3,
        epochs=1, batch=8, pairs_per_epoch=240, seed=0,
    )
    model.fit(demos)
    assert set(model.history_) == {"rank", "recon", "mi_bound"}
    assert len(model.history_["rank"]) == 30


def test_augmented_training_runs():
    rng = np.random.default_rng(4)
    demos = grid_demos(rng)
    model = MIGPSRReward(
        latent=8, hidden=(32, 16), critic_hidden=(16, 8), lr=1e-3, epochs=1,
        batch=8, pairs_per_epoch=80, augment_config=AugmentConfig(), seed=0,
    )
    model.fit(demos)  # runs through the full augmentation chain
    assert 0.0 <= model.predict(demos[0].frames[0].image) <= 1.0


@pytest.mark.parametrize("variant", ["vae", "ptr", "gpsr", "migpsr"])
def test_checkpoint_roundtrip_per_variant(tmp_path, variant):
    rng = np.random.default_rng(5)
    demos = grid_demos(rng)
    images = np.concatenate([d.images() for d in demos])
    if variant == "vae":
        model = ImageVAE(latent=8, hidden=(32, 16), min_images=2, epochs=2, batch=16, seed=1)
        model.fit(images)
    elif variant == "ptr":
        model = PTRReward(latent=8, hidden=(32, 16), lr=1e-3, epochs=1, batch=8,
                          pairs_per_epoch=80, seed=1).fit(demos)
    elif variant == "gpsr":
        vae = ImageVAE(latent=8, hidden=(32, 16), min_images=2, epochs=2, batch=16, seed=1)
        vae.fit(images)
        model = GPSRReward(vae=vae, lr=1e-3, epochs=1, batch=8, pairs_per_epoch=80, seed=1)
        model.fit(demos)
    else:
        model = MIGPSRReward(latent=8, hidden=(32, 16), critic_hidden=(16, 8), lr=1e-3,
                             epochs=1, batch=8, pairs_per_epoch=80, seed=1).fit(demos)
    path = tmp_path / f"{variant}.ckpt"
    save_model(model, path)
    loaded = load_model(path)
    if variant == "vae":
        assert np.allclose(loaded.encode(images[:4]), model.encode(images[:4]))
    else:
        assert np.allclose(loaded.predict(images[:4]), model.predict(images[:4]))


def test_load_model_missing_sidecar(tmp_path):
    path = tmp_path / "m.ckpt"
    path.write_bytes(b"PCKP")
    with pytest.raises(FileNotFoundError):
        load_model(path)
