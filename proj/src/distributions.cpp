#include "edo/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace edo {

namespace {

double sample_uniform(std::span<const double> params, Rng& rng) {
    // A sampled bound pair may arrive reversed; the support is
    // [min(a,b), max(a,b)] so the parameter space stays a box.
    const double lo = std::min(params[0], params[1]);
    const double hi = std::max(params[0], params[1]);
    return uniform_real(rng, lo, hi);
}

double sample_normal(std::span<const double> params, Rng& rng) {
    const double mu = params[0];
    const double sigma = params[1];
    if (sigma == 0.0) return mu;
    return std::normal_distribution<double>(mu, sigma)(rng);
}

void validate_normal_limits(const std::vector<Interval>& limits) {
    if (limits[1].lower < 0.0)
        throw ConfigError("normal family: sigma limits must be non-negative");
}

}  // namespace

const Family& uniform_family() {
    static const Family family{"uniform", {"a", "b"}, &sample_uniform, nullptr};
    return family;
}

const Family& normal_family() {
    static const Family family{"normal", {"mu", "sigma"}, &sample_normal, &validate_normal_limits};
    return family;
}

const Family* find_family(std::string_view name) {
    static const Family* registry[] = {&uniform_family(), &normal_family()};
    for (const Family* f : registry)
        if (f->name == name) return f;
    return nullptr;
}

void FamilySpec::validate() const {
    if (family == nullptr) throw ConfigError("family: unknown distribution family");
    if (initial_limits.size() != family->parameters.size())
        throw ConfigError("family '" + family->name + "': expected one limit interval per parameter (" +
                          std::to_string(family->parameters.size()) + ")");
    for (std::size_t p = 0; p < initial_limits.size(); ++p) {
        const auto& iv = initial_limits[p];
        if (!(iv.lower <= iv.upper) || !std::isfinite(iv.lower) || !std::isfinite(iv.upper))
            throw ConfigError("family '" + family->name + "': limits for '" + family->parameters[p] +
                              "' must be a finite interval with lower <= upper");
    }
    if (max_subtypes < 1)
        throw ConfigError("family '" + family->name + "': max_subtypes must be >= 1");
    if (family->validate_limits) family->validate_limits(initial_limits);
}

int SubtypeRegistry::assign_subtype(int family_index, const FamilySpec& spec, Rng& rng) {
    auto& live = live_.at(family_index);
    const std::size_t n_live = live.size();
    if (n_live < static_cast<std::size_t>(spec.max_subtypes)) {
        if (uniform_real(rng, 0.0, 1.0) < 1.0 / static_cast<double>(n_live + 1)) {
            const int id = next_id_[family_index]++;
            live.emplace(id, spec.initial_limits);
            return id;
        }
    }
    auto it = live.begin();
    std::advance(it, uniform_index(rng, n_live));
    return it->first;
}

const std::vector<Interval>& SubtypeRegistry::limits(int family_index, int subtype_id) const {
    const auto& live = live_.at(family_index);
    auto it = live.find(subtype_id);
    if (it == live.end())
        throw std::logic_error("subtype " + std::to_string(subtype_id) + " of family " +
                               std::to_string(family_index) + " is not live");
    return it->second;
}

bool SubtypeRegistry::is_live(int family_index, int subtype_id) const {
    const auto& live = live_.at(family_index);
    return live.find(subtype_id) != live.end();
}

void SubtypeRegistry::retire_except(int family_index, std::span<const int> keep) {
    auto& live = live_.at(family_index);
    for (auto it = live.begin(); it != live.end();) {
        if (std::find(keep.begin(), keep.end(), it->first) == keep.end())
            it = live.erase(it);
        else
            ++it;
    }
}

Interval shrink_interval(const Interval& current, double mean, double shrink_factor, int iteration) {
    // Parents carried over from earlier epochs can hold parameter values
    // outside the already-shrunk interval; clamping keeps lower <= upper.
    const double m = std::clamp(mean, current.lower, current.upper);
    const double half = 0.5 * current.width() * std::pow(shrink_factor, iteration);
    return Interval{std::max(current.lower, m - half), std::min(current.upper, m + half)};
}

void SubtypeRegistry::shrink_parameter(int family_index, int subtype_id, std::size_t param_index,
                                       std::span<const double> observed, double shrink_factor,
                                       int iteration) {
    if (observed.empty()) return;
    auto& live = live_.at(family_index);
    auto it = live.find(subtype_id);
    if (it == live.end()) return;  // absent from parents: leave untouched
    const double mean =
        std::accumulate(observed.begin(), observed.end(), 0.0) / static_cast<double>(observed.size());
    auto& interval = it->second.at(param_index);
    interval = shrink_interval(interval, mean, shrink_factor, iteration);
}

void SubtypeRegistry::restore(SubtypeLimits state) {
    live_ = std::move(state);
    next_id_.assign(live_.size(), 0);
    for (std::size_t f = 0; f < live_.size(); ++f)
        for (const auto& [id, _] : live_[f]) next_id_[f] = std::max(next_id_[f], id + 1);
}

int choose_family(std::size_t n_families, std::span<const double> weights, Rng& rng,
                  const std::vector<bool>* eligible) {
    if (weights.size() != n_families)
        throw ConfigError("weights: expected " + std::to_string(n_families) + " entries, got " +
                          std::to_string(weights.size()));
    double total = 0.0;
    for (std::size_t j = 0; j < n_families; ++j) {
        if (weights[j] < 0.0) throw ConfigError("weights: entries must be non-negative");
        if (!eligible || (*eligible)[j]) total += weights[j];
    }
    if (total <= 0.0) throw ConfigError("weights: total weight over eligible families must be positive");

    const double target = uniform_real(rng, 0.0, total);
    double cumulative = 0.0;
    std::size_t last = 0;
    for (std::size_t j = 0; j < n_families; ++j) {
        if (eligible && !(*eligible)[j]) continue;
        cumulative += weights[j];
        last = j;
        if (target < cumulative) return static_cast<int>(j);
    }
    return static_cast<int>(last);  // target == total (boundary draw)
}

DistributionInstance new_instance(int family_index, int subtype_id, const SubtypeRegistry& registry,
                                  Rng& rng) {
    const auto& limits = registry.limits(family_index, subtype_id);
    DistributionInstance instance{family_index, subtype_id, {}};
    instance.parameter_values.reserve(limits.size());
    for (const Interval& iv : limits) instance.parameter_values.push_back(uniform_real(rng, iv.lower, iv.upper));
    return instance;
}

double sample_value(const DistributionInstance& instance, std::span<const FamilySpec> families,
                    Rng& rng) {
    const Family* family = families[instance.family_index].family;
    return family->sample(instance.parameter_values, rng);
}

}  // namespace edo
