#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "edo/util.hpp"

namespace edo {

/// Closed real interval. lower <= upper is enforced wherever intervals enter.
struct Interval {
    double lower = 0.0;
    double upper = 0.0;

    double width() const { return upper - lower; }
    bool contains(double x) const { return lower <= x && x <= upper; }
    bool operator==(const Interval&) const = default;
};

/// Behaviour of a distribution family: parameter names, the sampling law and
/// an optional family-specific limit check. Instances of this struct live in
/// a static registry; additional families register by extending it.
struct Family {
    std::string name;
    std::vector<std::string> parameters;
    double (*sample)(std::span<const double> params, Rng& rng);
    void (*validate_limits)(const std::vector<Interval>& limits);
};

const Family& uniform_family();
const Family& normal_family();

/// Registry lookup by name; nullptr when unknown.
const Family* find_family(std::string_view name);

/// A family together with its search-space box: one limit interval per
/// parameter and the cap on independent subtypes.
struct FamilySpec {
    const Family* family = nullptr;
    std::vector<Interval> initial_limits;
    int max_subtypes = 1;

    void validate() const;
};

/// A concrete parameterised distribution attached to one dataset column.
struct DistributionInstance {
    int family_index = 0;  // index into the run's FamilySpec list
    int subtype_id = 0;
    std::vector<double> parameter_values;

    bool operator==(const DistributionInstance&) const = default;
};

/// Per-subtype current limits, keyed by family index then subtype id.
/// Used both as the live registry state and as the per-epoch snapshot.
using SubtypeLimits = std::vector<std::map<int, std::vector<Interval>>>;

/// Tracks the live subtypes of every family. Subtype ids increase
/// monotonically and are never reused, so a retired subtype can never be
/// assigned to a new column.
class SubtypeRegistry {
public:
    explicit SubtypeRegistry(std::size_t n_families) : next_id_(n_families, 0), live_(n_families) {}

    /// Pick a subtype for a new column of `family_index`: with probability
    /// 1/(live+1) allocate a fresh subtype (limits = the family's initial
    /// limits) while below max_subtypes, otherwise reuse a live one uniformly.
    int assign_subtype(int family_index, const FamilySpec& spec, Rng& rng);

    const std::vector<Interval>& limits(int family_index, int subtype_id) const;
    bool is_live(int family_index, int subtype_id) const;

    /// Retire every subtype of `family_index` not listed in `keep`.
    void retire_except(int family_index, std::span<const int> keep);

    /// Eqs. 1-2: contract one parameter interval of a live subtype about the
    /// mean of `observed` with half-width (u-l)/2 * s^t. Empty observations
    /// leave the parameter untouched.
    void shrink_parameter(int family_index, int subtype_id, std::size_t param_index,
                          std::span<const double> observed, double shrink_factor, int iteration);

    SubtypeLimits snapshot() const { return live_; }
    void restore(SubtypeLimits state);

private:
    std::vector<int> next_id_;
    SubtypeLimits live_;
};

/// Weighted family choice: returns index j with probability w_j / sum(w).
/// `eligible`, when given, restricts the draw to families where it is true
/// (weights renormalised over the eligible set).
int choose_family(std::size_t n_families, std::span<const double> weights, Rng& rng,
                  const std::vector<bool>* eligible = nullptr);

/// Create an instance of `family_index` under the given subtype: every
/// parameter is drawn uniformly from that subtype's current limit interval.
DistributionInstance new_instance(int family_index, int subtype_id, const SubtypeRegistry& registry,
                                  Rng& rng);

/// One draw from the concrete distribution the instance describes.
double sample_value(const DistributionInstance& instance, std::span<const FamilySpec> families,
                    Rng& rng);

/// Shrinkage core (Eqs. 1-2), exposed for direct testing: new limits centred
/// about mean (clamped into [lower, upper]) with half-width
/// (upper-lower)/2 * s^t, intersected with the current interval.
Interval shrink_interval(const Interval& current, double mean, double shrink_factor, int iteration);

}  // namespace edo
