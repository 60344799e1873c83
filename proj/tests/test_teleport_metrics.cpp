#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "spinchain/teleport_metrics.hpp"

using namespace spinchain;

namespace {

Vec16 random_state(std::mt19937_64& rng) {
    std::normal_distribution<Real> n;
    Vec16 v;
    for (int i = 0; i < 16; ++i) v(i) = Complex(n(rng), n(rng));
    return v.normalized();
}

}  // namespace

TEST(VonNeumannEntropy, KnownValues) {
    EXPECT_NEAR(qubits::von_neumann_entropy(MatrixC::Identity(4, 4) / 4.0), 2.0, 1e-14);
    MatrixC pure = MatrixC::Zero(4, 4);
    pure(1, 1) = 1.0;
    EXPECT_NEAR(qubits::von_neumann_entropy(pure), 0.0, 1e-14);
    MatrixC bad = MatrixC::Zero(2, 2);
    bad(0, 0) = 1.5;
    bad(1, 1) = -0.5;
    EXPECT_THROW(qubits::von_neumann_entropy(bad), NumericalError);
}

TEST(EntanglementEntropy, MatchesSchmidtDecomposition) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const Vec16 v = random_state(rng);
        EXPECT_NEAR(entanglement_entropy(FourQubitState::pure(v)), oracle::schmidt_entropy(v), 1e-10);
    }
}

TEST(EntanglementEntropy, ComplementaryBlocksAgree) {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        const auto s = FourQubitState::pure(random_state(rng));
        EXPECT_NEAR(entanglement_entropy(s, {A1, A2}), entanglement_entropy(s, {B1, B2}), 1e-10);
        EXPECT_NEAR(entanglement_entropy(s, {A1, B2}), entanglement_entropy(s, {A2, B1}), 1e-10);
        const Real e = entanglement_entropy(s);
        EXPECT_GE(e, -1e-12);
        EXPECT_LE(e, 2.0 + 1e-12);
    }
}

TEST(EntanglementEntropy, RejectsMixedStates) {
    EXPECT_THROW(entanglement_entropy(FourQubitState::mixed(Mat16::Identity() / 16.0)), DomainError);
    const auto pure_as_density = FourQubitState::mixed(basis_state("1100") * basis_state("1100").adjoint());
    EXPECT_NEAR(entanglement_entropy(pure_as_density), 0.0, 1e-12);
}

TEST(EntanglementEntropy, EffectiveTraceValues) {
    EXPECT_NEAR(entanglement_entropy(evolve_effective("1100", 0.0, 1.0, 0.1)), 0.0, 1e-12);
    EXPECT_NEAR(entanglement_entropy(FourQubitState::pure(evolve_effective("1100", bell_time_phases(0, 1.0, 0.1)))), 2.0,
                1e-9);
    for (int i = 0; i < 100; ++i) {
        const Real t = 3000.0 * i / 99.0;
        EXPECT_LE(entanglement_entropy(evolve_effective("1001", t, 1.0, 0.05)), 1e-12);
        EXPECT_LE(entanglement_entropy(evolve_effective("0110", t, 1.0, 0.05)), 1e-12);
    }
}

TEST(GeneralizedConcurrence, AgreesWithExplicitSpinFlip) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 50; ++trial) {
        const Vec16 v = random_state(rng);
        EXPECT_NEAR(generalized_concurrence(v), oracle::spin_flip_concurrence(v), 1e-12);
    }
    EXPECT_NEAR(generalized_concurrence(bell_product_resource(0.0, 4, 4)), 1.0, 1e-14);
    EXPECT_NEAR(generalized_concurrence(basis_state("1100")), 0.0, 1e-14);
}

TEST(EntanglementOfTeleportation, UnitForBellProducts) {
    for (Real theta : {0.0, pi / 4.0, pi / 2.0, 1.1})
        for (int k1 = 1; k1 <= 4; ++k1)
            for (int k2 = 1; k2 <= 4; ++k2)
                EXPECT_NEAR(entanglement_of_teleportation(FourQubitState::pure(bell_product_resource(theta, k1, k2))), 1.0,
                            1e-8);
    const auto tstar = FourQubitState::pure(evolve_effective("1100", bell_time_phases(0, 1.0, 0.1)));
    EXPECT_NEAR(entanglement_of_teleportation(tstar), 1.0, 1e-8);
}

TEST(EntanglementOfTeleportation, FamilyIsOrthonormalAndContainsTheState) {
    const Vec16 v = bell_product_resource(0.3, 2, 3);
    const auto fam = teleportation_family(v);
    EXPECT_LE(family_orthonormality_defect(fam), 1e-12);
    EXPECT_LE((fam[0] - v).norm(), 0.0);
}

TEST(EntanglementOfTeleportation, RejectsStatesWithoutAnOrthonormalFamily) {
    EXPECT_THROW(entanglement_of_teleportation(FourQubitState::pure(basis_state("1100"))), ValidationError);
    EXPECT_THROW(entanglement_of_teleportation(FourQubitState::mixed(Mat16::Identity() / 16.0)), DomainError);
}

TEST(BellBasis, OrthonormalForAnyPhase) {
    for (Real theta : {0.0, 0.4, pi / 2.0, 2.0}) {
        const BellBasis b{theta};
        for (int i = 1; i <= 4; ++i)
            for (int j = 1; j <= 4; ++j) EXPECT_NEAR(std::abs(b.state(i).dot(b.state(j))), i == j ? 1.0 : 0.0, 1e-15);
    }
    EXPECT_THROW(BellBasis{}.state(5), DomainError);
}

TEST(CorrectionSet, InvertsTheBellDecompositionOperators) {
    for (Real theta : {0.0, pi / 4.0, pi / 2.0, 0.7, 2.9}) {
        const CorrectionSet c{theta};
        for (int k = 1; k <= 4; ++k)
            for (int j = 1; j <= 4; ++j) {
                const Mat2 o = oracle::bell_decomposition_operator(theta, k, j);
                // O is unitary; O~ O must be a phase times the identity
                EXPECT_LE((o.adjoint() * o - Mat2::Identity()).cwiseAbs().maxCoeff(), 1e-14);
                const Mat2 prod = c.op(k, j) * o;
                EXPECT_NEAR(std::abs(prod(0, 0)), 1.0, 1e-12) << "theta=" << theta << " k=" << k << " j=" << j;
                EXPECT_LE((prod - prod(0, 0) * Mat2::Identity()).cwiseAbs().maxCoeff(), 1e-12)
                    << "theta=" << theta << " k=" << k << " j=" << j;
            }
    }
}

TEST(SampleInput, NormalisedAndRangeChecked) {
    for (std::uint64_t i = 0; i < 50; ++i) EXPECT_NEAR(sample_input(random_input(9, i)).norm(), 1.0, 1e-14);
    EXPECT_THROW(sample_input({1.5, 0, 0, 0, 0}), DomainError);
    EXPECT_THROW(sample_input({0, -0.1, 0, 0, 0}), DomainError);
    EXPECT_THROW(sample_input({0, 0, 0, 7.0, 0}), DomainError);
    // s = -1 leaves a single product branch
    const Vec4 v = sample_input({-1.0, 0.0, 0.0, 0.0, 0.0});
    EXPECT_NEAR(std::abs(v(0)), 1.0, 1e-15);
}

TEST(RandomInput, DeterministicPerSeedAndSample) {
    const auto a = random_input(42, 17), b = random_input(42, 17), c = random_input(43, 17);
    EXPECT_EQ(a.s, b.s);
    EXPECT_EQ(a.phi2, b.phi2);
    EXPECT_NE(a.s, c.s);
    for (std::uint64_t i = 0; i < 1000; ++i) {
        const auto p = random_input(1, i);
        EXPECT_GE(p.s, -1.0);
        EXPECT_LE(p.s, 1.0);
        EXPECT_GE(p.theta1, 0.0);
        EXPECT_LE(p.theta1, pi);
        EXPECT_GE(p.phi1, 0.0);
        EXPECT_LT(p.phi1, 2.0 * pi);
    }
}

TEST(Teleport, IdealResourcesAreExact) {
    std::mt19937_64 rng(1);
    for (Real theta : {0.0, pi / 4.0, pi / 2.0, 1.9})
        for (int k1 = 1; k1 <= 4; ++k1)
            for (int k2 = 1; k2 <= 4; ++k2) {
                const auto res = FourQubitState::pure(bell_product_resource(theta, k1, k2));
                const Vec4 in = sample_input(random_input(rng(), 0));
                const auto out = teleport(res, in, theta, k1, k2);
                ASSERT_EQ(out.size(), 16u);
                for (const auto& o : out) {
                    EXPECT_NEAR(o.probability, 1.0 / 16.0, 1e-10);
                    EXPECT_NEAR(o.fidelity, 1.0, 1e-10);
                }
            }
}

TEST(Teleport, ProbabilitiesSumToOneForMixedResources) {
    const ChainSpec spec{6, 1.0, 0.2};
    const auto rho = reduce_to_edge_blocks(evolve_two_particle(spec, {1, 2}, 31.0));
    const auto out = teleport(rho, sample_input(random_input(3, 3)), pi / 2.0, 2, 1);
    Real total = 0.0;
    for (const auto& o : out) {
        total += o.probability;
        if (o.defined) {
            EXPECT_GE(o.fidelity, -1e-12);
            EXPECT_LE(o.fidelity, 1.0 + 1e-12);
        }
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(Teleport, WrongCorrectionsDegrade) {
    const auto res = FourQubitState::pure(bell_product_resource(pi / 2.0, 2, 1));
    const auto est = monte_carlo_average_fidelity(res, pi / 2.0, 3, 1, 200, 5);
    EXPECT_LT(est.mean, 0.9);
}

TEST(Teleport, RejectsBadInputs) {
    const auto res = FourQubitState::pure(bell_product_resource(0.0, 1, 1));
    EXPECT_THROW(teleport(res, Vec4::Zero(), 0.0, 1, 1), ValidationError);
    EXPECT_THROW(teleport(res, sample_input({}), 0.0, 0, 1), DomainError);
}

TEST(Teleport, BellTimeResourceWithPhaseGateCorrections) {
    const auto res = FourQubitState::pure(evolve_effective("1100", bell_time_phases(0, 1.0, 0.1)));
    EXPECT_EQ(best_resource_indices(res, pi / 2.0), (std::pair<int, int>{2, 1}));
    const auto est = monte_carlo_average_fidelity(res, pi / 2.0, 2, 1, 100, 77);
    EXPECT_NEAR(est.mean, 1.0, 1e-10);
    EXPECT_LE(est.stderr_, 1e-10);
}

TEST(AverageFidelity, ClosedFormValues) {
    EXPECT_NEAR(average_fidelity_effective(0.0, 1.0, 0.1), 10.0 / 27.0, 1e-15);
    EXPECT_NEAR(average_fidelity_effective(bell_time(0, 1.0, 0.1), 1.0, 0.1), 1.0, 1e-12);
    const auto start = TwoParticleState::delta(22, {1, 2});
    EXPECT_NEAR(average_fidelity_full(start), 10.0 / 27.0, 1e-15);
}

TEST(AverageFidelity, FullFormulaOnClosedFormAmplitudesGivesTheEffectiveCurve) {
    for (int i = 0; i <= 40; ++i) {
        const Real slow = 2.0 * pi * i / 40.0;
        const Real t = slow / (0.1 * 0.1);
        EXPECT_NEAR(average_fidelity_full(oracle::closed_form_chain_state(22, slow)), average_fidelity_effective(t, 1.0, 0.1),
                    1e-12)
            << "slow phase " << slow;
    }
}

TEST(MonteCarlo, SeededAndParallelSafe) {
    const auto res = FourQubitState::pure(bell_product_resource(0.0, 1, 1));
    const auto a = monte_carlo_average_fidelity(res, 0.0, 1, 1, 20, 11);
    const auto b = monte_carlo_average_fidelity(res, 0.0, 1, 1, 20, 11);
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.samples, 20u);
    EXPECT_THROW(monte_carlo_average_fidelity(res, 0.0, 1, 1, 0, 11), ValidationError);
    std::vector<Real> values{1.0, 2.0, 3.0};
    const auto s = summarize_samples(values);
    EXPECT_NEAR(s.mean, 2.0, 1e-15);
    EXPECT_NEAR(s.stderr_, std::sqrt(1.0 / 3.0), 1e-15);
}

TEST(EntanglementEntropy, SpecExamples) {
    EXPECT_NEAR(entanglement_entropy(FourQubitState::pure(basis_state("1100"))), 0.0, 1e-14);
    // |Phi+>_{A1B1} (x) |00>_{A2B2}
    Vec16 v = Vec16::Zero();
    v(basis_index("0000")) = std::sqrt(0.5);
    v(basis_index("1010")) = std::sqrt(0.5);
    EXPECT_NEAR(entanglement_entropy(FourQubitState::pure(v)), 1.0, 1e-12);
    EXPECT_NEAR(entanglement_entropy(FourQubitState::pure(oracle::printed_bell_time_state(0))), 2.0, 1e-12);
}

TEST(GeneralizedConcurrence, SpecExamples) {
    EXPECT_NEAR(generalized_concurrence(basis_state("0000")), 0.0, 1e-15);
    // |Phi+>_{A1B1} (x) |Phi+>_{A2B2}
    Vec16 v = Vec16::Zero();
    for (const char* l : {"0000", "1010", "0101", "1111"}) v(basis_index(l)) = 0.5;
    EXPECT_NEAR(generalized_concurrence(v), 1.0, 1e-14);
    EXPECT_NEAR(oracle::spin_flip_concurrence(v), 1.0, 1e-14);
    std::mt19937_64 rng(12);
    const Vec16 r = random_state(rng);
    EXPECT_NEAR(generalized_concurrence(std::polar(1.0, 0.8) * r), generalized_concurrence(r), 1e-14);
}

TEST(EntanglementOfTeleportation, BruteForceOverTheFamilyForPhiPlusPairs) {
    Vec16 v = Vec16::Zero();
    for (const char* l : {"0000", "1001", "0110", "1111"}) v(basis_index(l)) = 0.5;   // Phi+ on (A1,B2) and (A2,B1)
    const auto fam = teleportation_family(v);
    Real sum = 0.0;
    for (const auto& f : fam) sum += oracle::spin_flip_concurrence(f);
    EXPECT_NEAR(sum / 16.0, 1.0, 1e-12);
    EXPECT_NEAR(entanglement_of_teleportation(FourQubitState::pure(v)), 1.0, 1e-12);
}
