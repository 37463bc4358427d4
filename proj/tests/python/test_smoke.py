"""Smoke tests for the python bindings."""

import numpy as np
import pytest

import coptact


def make_layout():
    spec = coptact.CapLayoutSpec()
    layout, truth = coptact.generate_cap_layout(spec)
    return layout, truth


def test_svd_project_returns_rotation():
    rng = np.random.default_rng(0)
    for _ in range(20):
        p = rng.normal(size=(3, 3))
        r = coptact.svd_project(p)
        assert np.allclose(r.T @ r, np.eye(3), atol=1e-9)
        assert abs(np.linalg.det(r) - 1.0) < 1e-9


def test_geodesic_angle_roundtrip():
    theta = 0.3
    c, s = np.cos(theta), np.sin(theta)
    rz = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    assert coptact.geodesic_angle(np.eye(3), rz) == pytest.approx(theta, abs=1e-12)


def test_layout_and_mapping_round_trip():
    layout, _ = make_layout()
    assert layout.n_taxels == 24

    spec = coptact.CapLayoutSpec()
    cspec = coptact.ContactSpec()
    cspec.seed = 3
    forces, positions = coptact.sample_contacts(spec, cspec, 20)

    recovered = 0
    for k in range(forces.shape[0]):
        reading = coptact.cop_to_taxels(forces[k], positions[k], layout)
        result = coptact.taxels_to_cop(reading, layout)
        assert result is not None
        f_hat, p_hat, active = result
        if active < 3:
            continue
        recovered += 1
        assert np.linalg.norm(p_hat - positions[k]) < 2e-3
        assert np.linalg.norm(f_hat - forces[k]) < 0.05 * np.linalg.norm(forces[k])
    assert recovered > 10


def test_kinematics_and_torque():
    chain = coptact.load_chain("fixtures/finger_4dof.json")
    assert chain.dof == 4
    q = np.array([0.1, 0.4, 0.5, 0.4])
    rot, trans = coptact.forward_kinematics(chain, q)
    assert np.allclose(rot.T @ rot, np.eye(3), atol=1e-12)
    jac = coptact.point_jacobian(chain, q, trans)
    tau = coptact.equilibrium_torque(jac, np.array([0.0, 0.0, 1.0]))
    assert tau.shape == (4,)
    assert np.allclose(tau, -jac.T @ np.array([0.0, 0.0, 1.0]))


def test_small_calibration_run():
    spec = coptact.CapLayoutSpec()
    spec.sigma = 0.00035
    spec.perturbation = np.deg2rad(20.0)
    spec.seed = 4
    layout, truth = coptact.generate_cap_layout(spec)

    cspec = coptact.ContactSpec()
    cspec.seed = 5
    cspec.shear_ratio_min = 1.5
    cspec.shear_ratio_max = 3.0
    forces, positions = coptact.sample_contacts(spec, cspec, 200)

    true_layout = coptact.TaxelLayout(
        layout.positions, truth, epsilon=layout.epsilon, sigma=layout.sigma
    )
    chain = coptact.load_chain("fixtures/finger_4dof.json")
    dataset = coptact.synthesize_dataset(
        forces, positions, true_layout, chain, np.array([0.1, 0.4, 0.5, 0.4])
    )
    report = coptact.calibrate(dataset, layout, chain, steps=15, reference=truth)
    assert len(report["loss_history"]) == 15
    assert report["final_loss"] < report["loss_history"][0]
    assert len(report["rotations"]) == 24


def test_actuator_and_probe_helpers():
    times, target, measured = coptact.simulate_actuator(
        stiffness=10.0, damping=0.5, coulomb_friction=0.0,
        viscous_friction=0.1, inertia=0.01, kind="step", duration=1.0
    )
    assert len(times) == len(measured) == 101
    assert measured[-1] == pytest.approx(0.5, abs=0.1)

    rng = np.random.default_rng(1)
    latents = [rng.normal(size=(30, 6)) for _ in range(4)]
    w = rng.normal(size=(6, 2))
    targets = [x @ w for x in latents]
    weights = coptact.linear_probe_fit(latents, targets, ridge=0.0)
    scores = coptact.probe_score(weights, latents, targets)
    assert scores[0]["r2"] == pytest.approx(1.0, abs=1e-9)

    points = np.vstack([rng.normal(size=(40, 2)), rng.normal(size=(40, 2)) + 50.0])
    labels = [0] * 40 + [1] * 40
    assert coptact.silhouette_coefficient(points, labels) > 0.9

    scores2, components, ratios = coptact.pca_project(points, 2)
    assert scores2.shape == (80, 2)
    assert ratios[0] >= ratios[1]
