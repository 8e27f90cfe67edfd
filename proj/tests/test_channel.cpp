#include <cmath>
#include <complex>
#include <vector>

#include <gtest/gtest.h>

#include <uavtrack/beamforming.hpp>
#include <uavtrack/channel.hpp>

using namespace uavtrack;

namespace {
EffectiveChannel aligned_channel(double u, double v, double ua, const LinkBudget& b, const ArrayConfig& a = {})
{
    return effective_channel({u, v, ua}, steer_precoder(ua, a.nu).weights, b, a);
}
} // namespace

TEST(Channel, SteeringVectors)
{
    const CVector a = steering_ula(0.0, 8);
    for (int i = 0; i < 8; ++i)
        EXPECT_NEAR(std::abs(a[i] - Complex(1, 0)), 0.0, 1e-15);
    const CVector b = steering_ula(0.3, 8);
    EXPECT_NEAR(std::arg(b[1]), -std::numbers::pi * 0.3, 1e-15);
    const CVector c = steering_upa(0.2, -0.1, ArrayConfig{});
    ASSERT_EQ(c.size(), 64);
    // Element (m, n) = (2, 3) sits at 2 * 8 + 3.
    EXPECT_NEAR(std::abs(c[19] - std::polar(1.0, -std::numbers::pi * (2 * 0.2 + 3 * -0.1))), 0.0, 1e-14);
}

TEST(Channel, PrecoderAlignmentIsSqrtNu)
{
    const LinkBudget b = LinkBudget::from_snr_db(20);
    const EffectiveChannel h = aligned_channel(0.1, 0.2, 0.37, b);
    EXPECT_NEAR(std::abs(h.alignment), std::sqrt(8.0), 1e-12);
    EXPECT_NEAR(h.alignment.imag(), 0.0, 1e-12);
}

TEST(Channel, NoiselessAlignedMagnitude)
{
    LinkBudget b = LinkBudget::from_snr_db(20);
    const ArrayConfig a;
    const EffectiveChannel h = aligned_channel(0.1, 0.2, 0.37, b);
    const CVector w = steer_weights(0.1, 0.2, a).weights;
    const CVector zero = CVector::Zero(64);
    EXPECT_NEAR(beam_magnitude(h, w, zero, b.symbol_energy), 22.627416997969522, 1e-10);
    PilotSounder s(h, b, a, 1);
    EXPECT_NEAR(s.reference_amplitude(), 22.627416997969522, 1e-12);
}

TEST(Channel, LinkBudgetGain)
{
    LinkBudget b;
    b.mode = ChannelMode::link_budget;
    b.antenna_gain = 2;
    b.distance = 10;
    b.path_loss_exponent = 2;
    b.mu = std::polar(1.0, 0.5);
    EXPECT_NEAR(std::abs(b.gain()), 0.02, 1e-15);
    EXPECT_NEAR(std::arg(b.gain()), 0.5, 1e-15);
    const LinkBudget s = LinkBudget::from_snr_db(10, 2.0);
    EXPECT_NEAR(s.noise_variance, 0.2, 1e-15);
    EXPECT_NEAR(s.snr(), 10.0, 1e-12);
    b.distance = 0;
    EXPECT_THROW(b.validate(), InvalidArgumentError);
}

TEST(Channel, NoiseVariance)
{
    Rng rng(3);
    double p = 0;
    const int n = 2000;
    for (int i = 0; i < n; ++i)
        p += draw_noise(64, 0.5, rng).squaredNorm() / 64;
    EXPECT_NEAR(p / n, 0.5, 0.01);
}

TEST(Channel, PairedNoiseAcrossSounders)
{
    const ArrayConfig a;
    const LinkBudget b = LinkBudget::from_snr_db(0);
    const EffectiveChannel h = aligned_channel(0.1, 0.2, 0.3, b);
    PilotSounder s1(h, b, a, 99), s2(h, b, a, 99);
    const CVector w1 = steer_weights(0.1, 0.2, a).weights;
    const CVector w2 = steer_weights(0.15, 0.2, a).weights;
    // Slot 0 sees one noise vector whichever beam is steered.
    const double y1 = s1.measure(w1);
    s2.measure(w2);
    EXPECT_EQ(s1.count(), 1u);
    EXPECT_EQ(s1.measure(w2), s2.measure(w2));
    PilotSounder s3(h, b, a, 99);
    EXPECT_EQ(s3.measure(w1), y1);
    PilotSounder s4(h, b, a, 100);
    EXPECT_NE(s4.measure(w1), y1);
}

TEST(Channel, BatchCounting)
{
    const ArrayConfig a;
    const LinkBudget b = LinkBudget::from_snr_db(10);
    const EffectiveChannel h = aligned_channel(0, 0, 0, b);
    std::vector<CVector> beams{steer_weights(0, 0, a).weights, steer_weights(0.1, 0, a).weights,
                               steer_weights(0, 0.1, a).weights};
    PilotSounder independent(h, b, a, 5);
    const auto y = independent.measure(std::span<const CVector>(beams));
    EXPECT_EQ(independent.count(), 3u);
    ASSERT_EQ(y.size(), 3u);
    // A batch is the same as measuring the beams one slot after another.
    PilotSounder single(h, b, a, 5);
    single.measure(beams[0]);
    EXPECT_EQ(single.measure(beams[1]), y[1]);

    PilotSounder shared(h, b, a, 5, true);
    const auto z = shared.measure(std::span<const CVector>(beams));
    EXPECT_EQ(shared.count(), 3u);
    // With a shared vector every beam sees the slot-0 noise.
    PilotSounder ref(h, b, a, 5);
    EXPECT_EQ(z[0], ref.measure(beams[0]));
}
