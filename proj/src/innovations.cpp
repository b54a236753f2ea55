#include "dcc/innovations.hpp"

#include <cmath>
#include <limits>

#include <fmt/core.h>

namespace dcc {

void InnovationSpec::validate() const {
    if (family != InnovationFamily::StudentT) return;
    if (!(dof > 0.0) || !std::isfinite(dof)) {
        throw DomainError("innovations: Student-t degrees of freedom must be positive");
    }
    if (standardization == Standardization::UnitVariance && !(dof > 2.0)) {
        throw DomainError(fmt::format(
            "innovations: unit-variance Student-t needs dof > 2 (got {}); use unit_scale", dof));
    }
}

double InnovationSpec::component_second_moment() const {
    if (family == InnovationFamily::Gaussian) return 1.0;
    if (standardization == Standardization::UnitVariance) return 1.0;
    return dof > 2.0 ? dof / (dof - 2.0) : std::numeric_limits<double>::infinity();
}

std::string InnovationSpec::describe() const {
    if (family == InnovationFamily::Gaussian) return "gaussian";
    return fmt::format("student_t(dof={}, {})", dof,
                       standardization == Standardization::UnitVariance ? "unit_variance"
                                                                        : "unit_scale");
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t run) {
    return splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ run);
}

InnovationSampler::InnovationSampler(const InnovationSpec& spec, std::uint64_t run)
    : spec_((spec.validate(), spec)),
      rng_(derive_seed(spec.seed, spec.stream, run)),
      normal_(0.0, 1.0),
      student_(spec.family == InnovationFamily::StudentT ? spec.dof : 1.0) {
    if (spec_.family == InnovationFamily::StudentT &&
        spec_.standardization == Standardization::UnitVariance) {
        scale_ = std::sqrt((spec_.dof - 2.0) / spec_.dof);
    }
}

double InnovationSampler::draw_component() {
    if (spec_.family == InnovationFamily::Gaussian) return normal_(rng_);
    return scale_ * student_(rng_);
}

Vector InnovationSampler::draw(std::size_t m) {
    Vector eta(static_cast<Eigen::Index>(m));
    for (Eigen::Index i = 0; i < eta.size(); ++i) eta(i) = draw_component();
    return eta;
}

}  // namespace dcc
