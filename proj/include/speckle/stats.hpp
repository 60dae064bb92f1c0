#pragma once

#include <complex>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "speckle/compensator.hpp"
#include "speckle/solver.hpp"

namespace speckle {

/// Raw ensemble of probe values, one row block per replica.  This is the
/// in-memory image of a probe CSV (solver and OU ensembles share it).
struct Ensemble {
    double eps = 1.0;
    std::vector<double> times;
    std::vector<double> etas;   // realized offsets (axis 0)
    std::vector<int> eta_modes; // integer offsets when applicable
    long replicas = 0;
    std::vector<std::complex<double>> X;       // [replica][time][eta]
    std::vector<double> Q;                     // [replica][time]
    std::vector<std::complex<double>> scriptQ; // [replica][time]

    std::size_t n_times() const { return times.size(); }
    std::size_t n_etas() const { return etas.size(); }
    std::complex<double> at(long r, std::size_t ti, std::size_t j) const {
        return X[(std::size_t(r) * times.size() + ti) * etas.size() + j];
    }
    double q_at(long r, std::size_t ti) const {
        return Q[std::size_t(r) * times.size() + ti];
    }
    std::complex<double> sq_at(long r, std::size_t ti) const {
        return scriptQ[std::size_t(r) * times.size() + ti];
    }
    void append(const CompensatedSample& sample, const std::vector<QvSnapshot>& qv);
};

/// Streaming moments over trajectories; merge is commutative and
/// associative up to floating reassociation.
class EnsembleAccumulator {
  public:
    EnsembleAccumulator() = default;
    EnsembleAccumulator(std::size_t n_times, std::size_t n_etas);

    void ingest(std::span<const std::complex<double>> values_by_slot,
                std::span<const double> q_by_time,
                std::span<const std::complex<double>> sq_by_time);
    void ingest(const Ensemble& ensemble); // all replicas
    void merge(const EnsembleAccumulator& other);

    long count() const { return count_; }
    std::size_t n_times() const { return n_times_; }
    std::size_t n_etas() const { return n_etas_; }

    std::complex<double> mean(std::size_t ti, std::size_t j) const;
    double second_abs(std::size_t ti, std::size_t j) const; // E|X|^2
    double fourth_abs(std::size_t ti, std::size_t j) const; // E|X|^4
    /// Raw moment E[X_j conj(X_k)].
    std::complex<double> raw_cov(std::size_t ti, std::size_t j, std::size_t k) const;
    /// Raw pseudo moment E[X_j X_k].
    std::complex<double> raw_pseudo(std::size_t ti, std::size_t j, std::size_t k) const;
    /// Cross moment of intensities E[|X_a|^2 |X_b|^2] between any two slots.
    double intensity_cross(std::size_t ta, std::size_t ja, std::size_t tb,
                           std::size_t jb) const;

    double q_mean(std::size_t ti) const;
    double q_var(std::size_t ti) const;
    double q_var_se(std::size_t ti) const; // large-sample SE of the variance
    double q_mean_se(std::size_t ti) const;
    double sq_abs2_mean(std::size_t ti) const; // E|scriptQ|^2
    double sq_abs2_se(std::size_t ti) const;

  private:
    std::size_t slot(std::size_t ti, std::size_t j) const { return ti * n_etas_ + j; }
    std::size_t n_times_ = 0, n_etas_ = 0;
    long count_ = 0;
    std::vector<std::complex<long double>> sum_x_;
    std::vector<long double> sum_abs2_, sum_abs4_;
    std::vector<std::complex<long double>> sum_cross_, sum_pseudo_; // j <= k pairs
    std::vector<long double> sum_ii_;                               // slot pairs a <= b
    std::vector<long double> sum_q_, sum_q2_, sum_q3_, sum_q4_;
    std::vector<std::complex<long double>> sum_sq_;
    std::vector<long double> sum_sq_abs2_, sum_sq_abs4_;
};

/// Pass/fail record; pass if and only if statistic <= threshold.
struct TestReport {
    std::string name;
    double statistic = 0;
    double threshold = 0;
    bool pass = false;
    double eps = 0; // 0 when not tied to a ladder rung
    std::map<std::string, double> details;
    std::string note;

    static TestReport make(std::string name, double statistic, double threshold,
                           double eps = 0);
};

// Distribution utilities ----------------------------------------------------

double normal_cdf(double x);
double normal_quantile(double p);
/// Kolmogorov asymptotic p-value with the Stephens small-sample correction.
double ks_pvalue(double d, long n);
/// KS statistic of samples already mapped through their null CDF.
double ks_statistic_uniform(std::vector<double> u);
/// Critical KS statistic for significance alpha at sample size n.
double ks_critical(double alpha, long n);

// Hypothesis tests ----------------------------------------------------------

/// Ito isometry check: ensemble mean of |X(t, eta_j)|^2 (which already equals
/// |psi_hat|^2 e^{-R0 t}) against the kinetic value w_tilde at the probe mode.
TestReport second_moment_identity_test(const Ensemble& ensemble, std::size_t ti,
                                       std::size_t j, double wtilde_ref,
                                       double ref_err);

/// Marginal normality (KS, Bonferroni-corrected), circularity and re/im
/// decorrelation of the centered fluctuation at one probe time.
/// sigma2_refs are the per-offset fluctuation variances sigma^2(t, xi_j).
TestReport gaussianity_test(const Ensemble& ensemble, std::size_t ti,
                            std::span<const double> sigma2_refs, double alpha = 0.01);

/// KS of |X - mean|^2 against the exponential law with mean 2 sigma^2.
TestReport intensity_exponential_test(std::span<const std::complex<double>> samples,
                                      double sigma2, double alpha = 0.01);

struct CovLadderRung {
    double eps = 0;
    std::vector<std::complex<double>> emp, ref;
    std::vector<double> emp_se, ref_se;
    std::vector<std::string> labels;
};

/// Per-rung max discrepancy between empirical covariances and their kinetic
/// references, trend check down the ladder, final-rung z gate.
std::vector<TestReport> covariance_convergence_report(
    const std::vector<CovLadderRung>& rungs);

struct SelfAveragingRung {
    double eps = 0;
    double q_mean = 0, q_mean_se = 0;
    double q_var = 0, q_var_se = 0;
    double sq_abs2 = 0, sq_abs2_se = 0;
};

std::vector<TestReport> self_averaging_test(const std::vector<SelfAveragingRung>& rungs,
                                            double q_ref, double q_ref_err);

/// Mixed fourth moment E[I_a I_b] against E[I_a] E[I_b] at two probe slots,
/// with I = |psi_hat|^2 recovered from the compensated values.
TestReport fourth_moment_factorization_test(const Ensemble& ensemble, std::size_t ta,
                                            std::size_t ja, std::size_t tb,
                                            std::size_t jb, double R0,
                                            bool assert_vanishing);

} // namespace speckle
