#ifndef NONLOCAL_SOLVER_HPP
#define NONLOCAL_SOLVER_HPP

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nonlocal/core.hpp"
#include "nonlocal/symbol.hpp"
#include "nonlocal/transforms.hpp"

namespace nonlocal {

struct Pole {
    Complex omega{};
    int order = 1;
};

class PoleSpec {
public:
    PoleSpec() = default;
    PoleSpec(std::vector<Pole> poles) : poles_(std::move(poles)) { }

    const std::vector<Pole>& poles() const { return poles_; }
    std::size_t size() const { return poles_.size(); }
    bool empty() const { return poles_.empty(); }
    const Pole& operator[](std::size_t i) const { return poles_[i]; }
    int K() const;

    /// Re(omega) < 0, orders >= 1, pairwise distinct; throws ErrorKind::Hypothesis.
    void validate() const;

    /// Default Laurent circle radius for pole i: half the distance to the
    /// nearest other pole, capped at |Re(omega_i)| / 2.
    double laurent_radius(std::size_t i) const;

private:
    std::vector<Pole> poles_;
};

/// Per pole i the coefficients a_{1,i} .. a_{r_i,i} of
/// P_i(t) = sum_k a_{k,i} t^{k-1} / (k-1)!.
struct ResiduePolynomials {
    std::vector<VectorXc> coefficients;

    /// n-th derivative of P_i at t.
    Complex polynomial(std::size_t i, double t, int n = 0) const;
};

/// n-th derivative of sum_i P_i(t) e^{omega_i t}.
Complex residue_sum_eval(const ResiduePolynomials& rp, const PoleSpec& poles, double t, int n = 0);

/// L of the residue part: sum a_{k,i} / (s - omega_i)^k as an expression tree.
NodePtr residue_laplace_tree(const ResiduePolynomials& rp, const PoleSpec& poles);

struct GeneralizedIC {
    enum class Provenance { UserSupplied, ConstructedFromIVP, SeriesFromData };

    ComplexFunction r;
    std::optional<AnalyticSymbol> symbol;
    Provenance provenance = Provenance::UserSupplied;
    std::string description;

    static GeneralizedIC zero();
    static GeneralizedIC from_symbol(AnalyticSymbol r, Provenance provenance = Provenance::UserSupplied);
    /// r(s) = sum_n c_n sum_j d_{j-1} s^{n-j} on |s| below the Taylor radius of f.
    static GeneralizedIC from_data(const AnalyticSymbol& f, const DataSequence& d, int n_trunc = 60);
};

const char* to_string(GeneralizedIC::Provenance p);

/// Empirical |G(s)| <= C |s|^{-q} on 8 rays in Re(s) > 0 at |s| = 1e2, 1e3, 1e4.
struct DecayFit {
    double q = 0.0;
    double C = 0.0;
    int probes = 0; // finite probe values used
    bool ok = false;
    std::string note;
};

DecayFit decay_fit(const ComplexFunction& G);

struct Diagnostics {
    std::optional<HardyMembership> hardy;
    std::optional<SmoothnessOrder> smoothness;
    std::optional<DecayFit> decay;
    std::optional<double> condition_number;
    std::vector<double> initial_value_errors; // |phi^{(n)}(0+) - phi_n| by finite differences
    std::optional<double> jacobian_deviation;
    std::optional<Complex> predicted_next_derivative; // phi^{(K)}(0+) from the moments
    std::vector<std::string> warnings;
};

/// phi(t) = Bromwich part + sum_i P_i(t) e^{omega_i t}; one-sided at t = 0.
class Solution {
public:
    Solution() = default;
    Solution(std::shared_ptr<const BromwichInverter> inverter, ResiduePolynomials residues,
             PoleSpec poles, BromwichConfig config);

    Complex eval(double t) const { return bromwich_part(t) + residue_part(t); }
    Complex operator()(double t) const { return eval(t); }
    Complex bromwich_part(double t, int n = 0) const;
    Complex residue_part(double t, int n = 0) const { return residue_sum_eval(residues_, poles_, t, n); }
    /// n-th derivative, one-sided at t = 0.
    Complex derivative(int n, double t) const { return bromwich_part(t, n) + residue_part(t, n); }

    const ResiduePolynomials& residues() const { return residues_; }
    const PoleSpec& poles() const { return poles_; }
    const BromwichConfig& config() const { return config_; }
    const BromwichInverter* inverter() const { return inverter_.get(); }

    Diagnostics diagnostics;

private:
    std::shared_ptr<const BromwichInverter> inverter_;
    ResiduePolynomials residues_;
    PoleSpec poles_;
    BromwichConfig config_;
};

struct ClassicalIVP {
    AnalyticSymbol f;
    Forcing J;
    PoleSpec poles;
    std::vector<Complex> initial_values;

    void validate() const;
};

/// phi = L^{-1}((L(J) + r) / f). Refuses when (L(J) + r)/f fails the Hardy
/// diagnostic or f vanishes on the contour.
Solution solve_generalized(const AnalyticSymbol& f, const Forcing& J, const GeneralizedIC& r,
                           const BromwichConfig& cfg = {});

struct LaurentResult {
    VectorXc coefficients; // a_1 .. a_order
    int nodes = 0;
    std::optional<std::string> warning;
};

/// a_k = (1/2 pi i) oint g(s) (s - omega)^{k-1} ds by the trapezoid rule on
/// |s - omega| = radius with node doubling from 64.
LaurentResult laurent_coefficients(const ComplexFunction& g, Complex omega, int order, double radius);

/// Carmichael form: Bromwich inversion of L(J)/f plus residue polynomials
/// from the Laurent coefficients of r/f at the declared poles.
Solution solve_with_poles(const AnalyticSymbol& f, const Forcing& J, const GeneralizedIC& r,
                          const PoleSpec& poles, const BromwichConfig& cfg = {});

/// K x K system for the residue coefficients, unknowns ordered
/// a_{1,1} .. a_{r_1,1}, a_{1,2}, ...
std::pair<MatrixXc, VectorXc> assemble_ivp_system(const ClassicalIVP& ivp, std::span<const Complex> Ln);

inline constexpr double max_condition_number = 1e10;

std::pair<Solution, GeneralizedIC> solve_classical_ivp(const ClassicalIVP& ivp, const BromwichConfig& cfg = {});

/// n-th one-sided derivative at 0 from samples at 0, h, 2h, ... (fourth
/// order), Richardson-combined over h and 2h.
Complex one_sided_derivative(const TimeFunction& phi, int n, double h = 1e-3);

struct ZeroInfo {
    Complex zero{};
    int multiplicity = 1;
};

struct Rectangle {
    double re_min, re_max, im_min, im_max;
};

/// Zeros of f in a rectangle by the argument principle with recursive
/// bisection, then Newton (simple zeros) or the contour centroid (multiple).
std::vector<ZeroInfo> find_zeros(const AnalyticSymbol& f, const Rectangle& rect, int max_zeros = 64);

} // namespace nonlocal

#endif
