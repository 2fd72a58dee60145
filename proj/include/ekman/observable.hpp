#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ekman/spectral.hpp"

namespace ekman {

// A cylindrical observable phi(xi) = f(<xi,g_1>, ..., <xi,g_m>): it sees the
// field only through finitely many pairings against band-limited test
// functions, which makes it sequentially weak-star continuous. The outer map
// f comes from a fixed bounded catalog.

struct TestFunctionTerm {
    bool is_sin = true;
    int k1 = 1;
    int k2 = 0;
    double amplitude = 1.0;

    bool operator==(const TestFunctionTerm&) const = default;
};

// One test function g = sum of trigonometric terms.
struct TestFunctionSpec {
    std::vector<TestFunctionTerm> terms;

    bool operator==(const TestFunctionSpec&) const = default;
};

struct OuterSpec {
    enum class Kind { identity, clipped_poly, tanh_combo, smoothed_band };

    Kind kind = Kind::tanh_combo;
    int index = 0;                 // coordinate used by identity/poly/band
    double bound = 1e6;            // clip level for identity and poly
    std::vector<double> coeffs;    // poly coefficients, constant term first
    std::vector<double> weights;   // tanh combination weights
    double bias = 0.0;
    double lo = -1.0, hi = 1.0, width = 0.5;  // smoothed band edges

    bool operator==(const OuterSpec&) const = default;
};

struct ObservableSpec {
    std::string name;
    OuterSpec outer;
    std::vector<TestFunctionSpec> test_functions;

    bool operator==(const ObservableSpec&) const = default;
};

class Observable {
public:
    Observable(const ObservableSpec& spec, const FourierGrid& grid)
        : name_(spec.name), outer_(spec.outer), grid_(grid) {
        if (spec.test_functions.empty())
            throw config_error("observable '" + spec.name + "': needs at least one test function");
        for (const auto& tf : spec.test_functions) {
            ScalarField g(grid);
            for (const auto& term : tf.terms) {
                if (std::abs(term.k1) > grid.kmax_dealias || std::abs(term.k2) > grid.kmax_dealias)
                    throw config_error("observable '" + spec.name +
                                       "': test-function mode outside retained band");
                if (term.is_sin)
                    g.add_sin(term.k1, term.k2, term.amplitude);
                else
                    g.add_cos(term.k1, term.k2, term.amplitude);
            }
            tests_.push_back(std::move(g));
        }
    }

    const std::string& name() const { return name_; }
    std::size_t arity() const { return tests_.size(); }
    const std::vector<ScalarField>& test_functions() const { return tests_; }

    // Recorded sup|f| over the outer map's range.
    double sup_bound() const {
        switch (outer_.kind) {
            case OuterSpec::Kind::identity:
            case OuterSpec::Kind::clipped_poly:
                return outer_.bound;
            default:
                return 1.0;
        }
    }

    double operator()(const ScalarField& xi) const {
        if (xi.grid() != grid_) throw config_error("observable '" + name_ + "': grid mismatch");
        std::vector<double> v(tests_.size());
        for (std::size_t i = 0; i < tests_.size(); ++i) v[i] = pairing(xi, tests_[i]);
        return outer(v);
    }

private:
    double outer(const std::vector<double>& v) const {
        switch (outer_.kind) {
            case OuterSpec::Kind::identity:
                return std::clamp(v.at(outer_.index), -outer_.bound, outer_.bound);
            case OuterSpec::Kind::clipped_poly: {
                const double x = v.at(outer_.index);
                double acc = 0.0, p = 1.0;
                for (double c : outer_.coeffs) {
                    acc += c * p;
                    p *= x;
                }
                return std::clamp(acc, -outer_.bound, outer_.bound);
            }
            case OuterSpec::Kind::tanh_combo: {
                double acc = outer_.bias;
                for (std::size_t i = 0; i < outer_.weights.size() && i < v.size(); ++i)
                    acc += outer_.weights[i] * v[i];
                return std::tanh(acc);
            }
            case OuterSpec::Kind::smoothed_band: {
                const double x = v.at(outer_.index);
                return 0.5 * (std::tanh((x - outer_.lo) / outer_.width) -
                              std::tanh((x - outer_.hi) / outer_.width));
            }
        }
        return 0.0;
    }

    std::string name_;
    OuterSpec outer_;
    FourierGrid grid_;
    std::vector<ScalarField> tests_;
};

inline double observable_eval(const Observable& phi, const ScalarField& xi) { return phi(xi); }

namespace detail {

inline ObservableSpec tanh_of_pairing(std::string name, TestFunctionSpec g, double weight) {
    ObservableSpec spec;
    spec.name = std::move(name);
    spec.outer.kind = OuterSpec::Kind::tanh_combo;
    spec.outer.weights = {weight};
    spec.test_functions = {std::move(g)};
    return spec;
}

} // namespace detail

// The fixed catalog used by the statistics commands.
inline std::vector<ObservableSpec> default_catalog() {
    std::vector<ObservableSpec> out;

    out.push_back(detail::tanh_of_pairing("tanh_s10", {{{true, 1, 0, 1.0}}}, 1.0));
    out.push_back(detail::tanh_of_pairing("tanh_c01", {{{false, 0, 1, 1.0}}}, 1.0));

    // smoothed indicator of <xi, sin(x1)cos(x2)> in [-1, 1]
    ObservableSpec band;
    band.name = "band_s11";
    band.outer.kind = OuterSpec::Kind::smoothed_band;
    band.outer.lo = -1.0;
    band.outer.hi = 1.0;
    band.outer.width = 0.5;
    band.test_functions = {{{{true, 1, 1, 0.5}, {true, 1, -1, 0.5}}}};
    out.push_back(band);

    // clipped square of <xi, cos(2 x1)>
    ObservableSpec poly;
    poly.name = "sq_c20";
    poly.outer.kind = OuterSpec::Kind::clipped_poly;
    poly.outer.coeffs = {0.0, 0.0, 1.0};
    poly.outer.bound = 100.0;
    poly.test_functions = {{{{false, 2, 0, 1.0}}}};
    out.push_back(poly);

    // tanh of a two-pairing combination
    ObservableSpec mix;
    mix.name = "tanh_mix";
    mix.outer.kind = OuterSpec::Kind::tanh_combo;
    mix.outer.weights = {0.7, 0.5};
    mix.outer.bias = 0.1;
    mix.test_functions = {{{{true, 1, 0, 1.0}}}, {{{false, 0, 1, 1.0}}}};
    out.push_back(mix);

    return out;
}

} // namespace ekman
