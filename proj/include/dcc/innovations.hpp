#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "dcc/matrix_kit.hpp"

namespace dcc {

enum class InnovationFamily { Gaussian, StudentT };
enum class Standardization { UnitVariance, UnitScale };

/// i.i.d. innovation law with independent components.
///
/// StudentT + UnitVariance rescales by sqrt((dof-2)/dof) and needs dof > 2.
/// StudentT + UnitScale draws the raw t law; it is the only option for dof <= 2.
struct InnovationSpec {
    InnovationFamily family = InnovationFamily::Gaussian;
    double dof = 0.0;
    Standardization standardization = Standardization::UnitVariance;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;

    void validate() const;
    /// E[eta_k^2]; +inf when it does not exist.
    double component_second_moment() const;
    /// E||eta||_2^2 in dimension m.
    double mean_norm_sq(std::size_t m) const { return static_cast<double>(m) * component_second_moment(); }
    std::string describe() const;
};

/// Seed for the generator of (seed, stream, run); distinct runs get
/// statistically independent streams and never depend on scheduling.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t run);

class InnovationSampler {
public:
    explicit InnovationSampler(const InnovationSpec& spec, std::uint64_t run = 0);

    double draw_component();
    Vector draw(std::size_t m);

private:
    InnovationSpec spec_;
    std::mt19937_64 rng_;
    std::normal_distribution<double> normal_;
    std::student_t_distribution<double> student_;
    double scale_ = 1.0;
};

}  // namespace dcc
