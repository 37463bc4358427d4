#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>

#include "coptact/synthetic.hpp"
#include "support/fixtures.hpp"
#include "support/test_utils.hpp"

using namespace coptact;
using namespace coptact::synth;
using Eigen::Vector3d;
using Eigen::Vector4d;

TEST_CASE("generate_cap_layout: single taxel sits at the pole") {
    CapLayoutSpec spec;
    spec.rows = 1;
    spec.cols = 1;
    const CapLayout cap = generate_cap_layout(spec);
    CHECK(cap.layout.size() == 1);
    CHECK((cap.layout.positions[0] - Vector3d(0, 0, spec.radius)).norm() < 1e-15);
    CHECK((cap.layout.normal(0) - Vector3d(0, 0, -1)).norm() < 1e-12);
}

TEST_CASE("generate_cap_layout: 24 normals point at the cap center") {
    const CapLayout cap = generate_cap_layout(CapLayoutSpec{});
    REQUIRE(cap.layout.size() == 24);
    for (int i = 0; i < 24; ++i) {
        CHECK(std::abs(cap.layout.positions[i].norm() - 0.010) < 1e-12);
        const Vector3d to_center = -cap.layout.positions[i].normalized();
        CHECK((cap.layout.normal(i) - to_center).norm() < 1e-9);
    }
}

TEST_CASE("generate_cap_layout: layout invariants hold for assorted specs") {
    for (int rows : {1, 3, 4}) {
        for (int cols : {2, 6}) {
            CapLayoutSpec spec;
            spec.rows = rows;
            spec.cols = cols;
            const CapLayout cap = generate_cap_layout(spec);
            CHECK_NOTHROW(cap.layout.validate());  // includes pairwise-distinct positions
        }
    }
}

TEST_CASE("generate_cap_layout: perturbed true orientations stay within the bound") {
    CapLayoutSpec spec = testutil::benchmark_cap_spec(9, 30.0);
    const CapLayout cap = generate_cap_layout(spec);
    bool any_nontrivial = false;
    for (int i = 0; i < cap.layout.size(); ++i) {
        const double angle =
            geom::geodesic_angle(cap.layout.orientations[i], cap.true_orientations[i]);
        CHECK(angle <= 30.0 * M_PI / 180.0 + 1e-9);
        if (angle > 0.1) any_nontrivial = true;
    }
    CHECK(any_nontrivial);
}

TEST_CASE("sample_contacts: count zero and determinism") {
    const CapLayoutSpec spec;
    ContactSpec cspec;
    cspec.seed = 77;
    CHECK(sample_contacts(spec, cspec, 0).empty());

    const auto a = sample_contacts(spec, cspec, 50);
    const auto b = sample_contacts(spec, cspec, 50);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].position == b[i].position);
        CHECK(a[i].force == b[i].force);
    }
}

TEST_CASE("sample_contacts: magnitudes in range, positions on the cap, inward pressure") {
    const CapLayoutSpec spec;
    ContactSpec cspec;
    cspec.seed = 3;
    for (const auto& c : sample_contacts(spec, cspec, 200)) {
        CHECK(c.force.norm() >= cspec.force_min - 1e-12);
        CHECK(c.force.norm() <= cspec.force_max + 1e-12);
        CHECK(std::abs(c.position.norm() - spec.radius) < 1e-12);
        CHECK(c.force.dot(-c.position.normalized()) > 0.0);  // pressing into the surface
    }
}

TEST_CASE("sample_contacts: every taxel active in at least 1 percent of samples") {
    const CapLayoutSpec spec;
    const auto cap = generate_cap_layout(spec).layout;
    ContactSpec cspec;
    cspec.seed = 4;
    const auto contacts = sample_contacts(spec, cspec, 1000);
    std::vector<int> activity(cap.size(), 0);
    for (const auto& c : contacts) {
        for (int i : sensor::active_set(sensor::cop_to_taxels(c, cap), cap)) ++activity[i];
    }
    for (int i = 0; i < cap.size(); ++i) CHECK(activity[i] >= 10);
}

TEST_CASE("synthesize_dataset: zero-force contact gives zero reading and zero torque") {
    const CapLayoutSpec spec;
    const CapLayout cap = generate_cap_layout(spec);
    sensor::CopContact contact;
    contact.position = cap.layout.positions[5];
    contact.force = Vector3d::Zero();
    const auto dataset = synthesize_dataset({contact}, cap.layout, testutil::reference_finger(),
                                            testutil::nominal_pose(), NoiseSpec{});
    REQUIRE(dataset.size() == 1);
    for (const auto& f : dataset[0].reading.forces) CHECK(f.norm() == 0.0);
    CHECK(dataset[0].tau.norm() == 0.0);
}

TEST_CASE("synthesize_dataset: stored torque equals a bitwise recomputation") {
    const CapLayoutSpec spec = testutil::benchmark_cap_spec(15);
    const CapLayout cap = generate_cap_layout(spec);
    const auto true_layout = cap.layout.with_orientations(cap.true_orientations);
    const auto chain = testutil::reference_finger();
    const auto contacts = sample_contacts(spec, testutil::benchmark_contact_spec(16), 40);
    const auto dataset =
        synthesize_dataset(contacts, true_layout, chain, testutil::nominal_pose(), NoiseSpec{});
    for (const auto& s : dataset) {
        const auto estimate = sensor::taxels_to_cop(s.reading, true_layout);
        REQUIRE(estimate.has_value());
        const kin::FrameChain frames = kin::frame_chain(chain, s.q);
        const Vector3d p_base = frames.sensor_pose.apply(estimate->position);
        const Vector3d f_base = frames.sensor_pose.rotation * estimate->force;
        const Eigen::Vector4d tau =
            kin::equilibrium_torque(kin::point_jacobian(frames, p_base), f_base);
        CHECK((tau - s.tau).norm() == 0.0);  // bitwise
    }
}

TEST_CASE("synthesize_dataset: generator-model consistency on the mapping reference") {
    // default (mapping) fixture: moderate shear, sigma 0.9 mm
    const CapLayoutSpec spec;
    const CapLayout cap = generate_cap_layout(spec);
    ContactSpec cspec;
    cspec.seed = 8;
    const auto contacts = sample_contacts(spec, cspec, 300);
    for (const auto& c : contacts) {
        const auto reading = sensor::cop_to_taxels(c, cap.layout);
        const auto estimate = sensor::taxels_to_cop(reading, cap.layout);
        REQUIRE(estimate.has_value());
        if (estimate->active_count < 3) continue;
        CHECK((estimate->position - c.position).norm() < 0.002);
        CHECK((estimate->force - c.force).norm() < 0.05 * c.force.norm());
    }
}

TEST_CASE("synthesize_dataset: noise reproducible under a fixed seed") {
    const CapLayoutSpec spec;
    const CapLayout cap = generate_cap_layout(spec);
    ContactSpec cspec;
    cspec.seed = 5;
    const auto contacts = sample_contacts(spec, cspec, 20);
    NoiseSpec noise;
    noise.force_multiplicative = 0.1;
    noise.torque_additive = 0.01;
    noise.q_jitter = 0.02;
    noise.seed = 99;
    const auto chain = testutil::reference_finger();
    const auto a = synthesize_dataset(contacts, cap.layout, chain, testutil::nominal_pose(), noise);
    const auto b = synthesize_dataset(contacts, cap.layout, chain, testutil::nominal_pose(), noise);
    for (size_t s = 0; s < a.size(); ++s) {
        CHECK(a[s].tau == b[s].tau);
        CHECK(a[s].q == b[s].q);
        for (int i = 0; i < cap.layout.size(); ++i) {
            CHECK(a[s].reading.forces[i] == b[s].reading.forces[i]);
        }
    }
}
