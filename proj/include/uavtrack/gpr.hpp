#ifndef UAVTRACK_GPR_HPP
#define UAVTRACK_GPR_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <uavtrack/errors.hpp>

namespace uavtrack::gpr {

using Point = Eigen::Vector2d;
/// One training or query input per row.
using Points = Eigen::Matrix<double, Eigen::Dynamic, 2>;

/// Squared-exponential kernel hyperparameters with a diagonal (ARD) length
/// scale matrix, Sigma = diag(length_scales)^2.
struct Hyperparams {
    double signal_std = 1.0;
    Eigen::Vector2d length_scales{1.0, 1.0};
    double noise_std = 0.1;

    void validate() const
    {
        if (!(signal_std > 0.0) || !(length_scales.minCoeff() > 0.0) || !(noise_std >= 0.0))
            throw InvalidArgumentError("gpr: hyperparameters must be positive");
    }
};

/// sigma_s^2 * exp(-1/2 (a-b)^T Sigma^-1 (a-b)).
inline double kernel(const Point& a, const Point& b, const Hyperparams& hp)
{
    const Eigen::Vector2d d = (a - b).cwiseQuotient(hp.length_scales);
    return hp.signal_std * hp.signal_std * std::exp(-0.5 * d.squaredNorm());
}

/// Partial derivatives of the log marginal likelihood in natural parameters.
struct HyperGradient {
    double signal_std = 0.0;
    Eigen::Vector2d length_scales = Eigen::Vector2d::Zero();
    double noise_std = 0.0;

    Eigen::Vector4d vector() const { return {signal_std, length_scales.x(), length_scales.y(), noise_std}; }
};

struct Posterior {
    Eigen::VectorXd mean;
    Eigen::VectorXd variance;
};

/// Zero-mean GP conditioned on (X, y) with a cached Cholesky factor of
/// K(X, X) + (sigma_n^2 + jitter) I and the weight vector alpha = K~^-1 y.
///
/// Jitter starts at 1e-10 * sigma_s^2 and grows tenfold up to 1e-6 * sigma_s^2
/// before the factorization is declared failed.
class GprModel {
public:
    GprModel(Points inputs, Eigen::VectorXd outputs, Hyperparams hp)
        : x_(std::move(inputs)), y_(std::move(outputs)), hp_(hp)
    {
        hp_.validate();
        if (x_.rows() != y_.size())
            throw InvalidArgumentError("gpr: inputs and outputs differ in length");
        if (x_.rows() == 0)
            throw InvalidArgumentError("gpr: empty training set");
        factorize();
    }

    /// Returns the model with one more training point. The factor is
    /// extended by one row instead of being recomputed.
    GprModel append(const Point& x, double y) const
    {
        GprModel out = *this;
        const Eigen::Index n = x_.rows();
        out.x_.conservativeResize(n + 1, Eigen::NoChange);
        out.x_.row(n) = x.transpose();
        out.y_.conservativeResize(n + 1);
        out.y_[n] = y;

        const Eigen::VectorXd k = cross(x);
        out.kf_.conservativeResize(n + 1, n + 1);
        out.kf_.col(n).head(n) = k;
        out.kf_.row(n).head(n) = k.transpose();
        out.kf_(n, n) = hp_.signal_std * hp_.signal_std;
        const Eigen::VectorXd l = chol_.triangularView<Eigen::Lower>().solve(k);
        const double d2 = out.kf_(n, n) + diagonal_term() - l.squaredNorm();
        if (!(d2 > 0.0)) {
            out.factorize();
            return out;
        }
        out.chol_.conservativeResize(n + 1, n + 1);
        out.chol_.col(n).setZero();
        out.chol_.row(n).head(n) = l.transpose();
        out.chol_(n, n) = std::sqrt(d2);
        out.solve_alpha();
        return out;
    }

    double log_marginal_likelihood() const
    {
        const double n = static_cast<double>(y_.size());
        const double log_det = 2.0 * chol_.diagonal().array().log().sum();
        return -0.5 * y_.dot(alpha_) - 0.5 * log_det - 0.5 * n * std::log(2.0 * std::numbers::pi);
    }

    /// dL/dtheta_j = 1/2 tr((alpha alpha^T - K~^-1) dK~/dtheta_j).
    HyperGradient likelihood_gradient() const
    {
        const Eigen::Index n = x_.rows();
        const Eigen::MatrixXd& kf = kf_;
        const Eigen::MatrixXd w = alpha_ * alpha_.transpose() - inverse();

        HyperGradient g;
        g.signal_std = (w.cwiseProduct(kf)).sum() / hp_.signal_std;
        for (int d = 0; d < 2; ++d) {
            const double l = hp_.length_scales[d];
            double acc = 0.0;
            for (Eigen::Index j = 0; j < n; ++j) {
                for (Eigen::Index i = 0; i < n; ++i) {
                    const double diff = x_(i, d) - x_(j, d);
                    acc += w(i, j) * kf(i, j) * diff * diff;
                }
            }
            g.length_scales[d] = 0.5 * acc / (l * l * l);
        }
        g.noise_std = w.trace() * hp_.noise_std;
        return g;
    }

    double mean(const Point& x) const { return cross(x).dot(alpha_); }

    double variance(const Point& x) const
    {
        const Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>().solve(cross(x));
        return std::max(0.0, kernel(x, x, hp_) - v.squaredNorm());
    }

    Posterior posterior(const Points& queries) const
    {
        Posterior p;
        p.mean.resize(queries.rows());
        p.variance.resize(queries.rows());
        for (Eigen::Index q = 0; q < queries.rows(); ++q) {
            const Point x = queries.row(q).transpose();
            p.mean[q] = mean(x);
            p.variance[q] = variance(x);
        }
        return p;
    }

    /// Gradient of the posterior mean with respect to the query input.
    Point mean_gradient(const Point& x) const
    {
        Point g = Point::Zero();
        const Eigen::Vector2d inv_l2 = hp_.length_scales.cwiseProduct(hp_.length_scales).cwiseInverse();
        for (Eigen::Index i = 0; i < x_.rows(); ++i) {
            const Point xi = x_.row(i).transpose();
            g -= alpha_[i] * kernel(x, xi, hp_) * (x - xi).cwiseProduct(inv_l2);
        }
        return g;
    }

    /// K(X, X) without noise or jitter.
    const Eigen::MatrixXd& kernel_matrix() const noexcept { return kf_; }

    /// (K + (sigma_n^2 + jitter) I)^-1 from the cached factor.
    Eigen::MatrixXd inverse() const
    {
        const Eigen::Index n = x_.rows();
        Eigen::MatrixXd inv = Eigen::MatrixXd::Identity(n, n);
        chol_.triangularView<Eigen::Lower>().solveInPlace(inv);
        chol_.triangularView<Eigen::Lower>().transpose().solveInPlace(inv);
        return inv;
    }

    const Points& inputs() const noexcept { return x_; }
    const Eigen::VectorXd& outputs() const noexcept { return y_; }
    const Hyperparams& hyperparams() const noexcept { return hp_; }
    const Eigen::MatrixXd& cholesky() const noexcept { return chol_; }
    const Eigen::VectorXd& weights() const noexcept { return alpha_; }
    double jitter() const noexcept { return jitter_; }
    Eigen::Index size() const noexcept { return x_.rows(); }

private:
    double diagonal_term() const { return hp_.noise_std * hp_.noise_std + jitter_; }

    Eigen::VectorXd cross(const Point& x) const
    {
        Eigen::VectorXd k(x_.rows());
        for (Eigen::Index i = 0; i < x_.rows(); ++i)
            k[i] = kernel(x, x_.row(i).transpose(), hp_);
        return k;
    }

    void factorize()
    {
        const Eigen::Index n = x_.rows();
        const double s2 = hp_.signal_std * hp_.signal_std;
        kf_.resize(n, n);
        for (Eigen::Index j = 0; j < n; ++j) {
            kf_(j, j) = s2;
            for (Eigen::Index i = j + 1; i < n; ++i)
                kf_(i, j) = kf_(j, i) = kernel(x_.row(i).transpose(), x_.row(j).transpose(), hp_);
        }
        for (double rel = 1e-10; rel <= 1e-6 * (1.0 + 1e-9); rel *= 10.0) {
            jitter_ = rel * s2;
            Eigen::MatrixXd k = kf_;
            k.diagonal().array() += diagonal_term();
            Eigen::LLT<Eigen::MatrixXd> llt(k);
            if (llt.info() == Eigen::Success) {
                chol_ = llt.matrixL();
                if (chol_.diagonal().minCoeff() > 0.0) {
                    solve_alpha();
                    return;
                }
            }
        }
        throw NotPositiveDefiniteError("gpr: kernel matrix is not positive definite after jitter escalation");
    }

    void solve_alpha()
    {
        alpha_ = chol_.triangularView<Eigen::Lower>().solve(y_);
        chol_.triangularView<Eigen::Lower>().transpose().solveInPlace(alpha_);
    }

    Points x_;
    Eigen::VectorXd y_;
    Hyperparams hp_;
    Eigen::MatrixXd kf_;
    Eigen::MatrixXd chol_;
    Eigen::VectorXd alpha_;
    double jitter_ = 0.0;
};

struct FitOptions {
    int max_iterations = 200;
    double gradient_tolerance = 1e-6; // on the log-parameter gradient
    bool fit_noise = true;
    double initial_step = 0.1;
    int max_backtracks = 30;
    /// Longest move per iteration in log-parameter space.
    double max_log_step = 0.5;
    double min_signal_std = 1e-6, max_signal_std = 1e6;
    double min_length = 1e-4, max_length = 1e4;
    double min_noise_std = 1e-6, max_noise_std = 1e6;
    /// Raises the noise lower bound to this fraction of std(y).
    double relative_noise_floor = 1e-3;
};

struct FitResult {
    Hyperparams hyperparams;
    double log_likelihood = 0.0;
    double initial_log_likelihood = 0.0;
    int iterations = 0;
    bool converged = false;
    /// Set when not a single ascent step improved on the initial point.
    bool no_ascent = false;
    /// Likelihood after each accepted step, starting with the initial value.
    std::vector<double> trace;
};

namespace detail {

using LogParams = Eigen::Vector4d; // log sigma_s, log l_u, log l_v, log sigma_n

inline LogParams to_log(const Hyperparams& hp)
{
    return {std::log(hp.signal_std), std::log(hp.length_scales.x()), std::log(hp.length_scales.y()),
            std::log(std::max(hp.noise_std, 1e-300))};
}

inline Hyperparams from_log(const LogParams& p)
{
    return {std::exp(p[0]), {std::exp(p[1]), std::exp(p[2])}, std::exp(p[3])};
}

inline double population_std(const Eigen::VectorXd& y)
{
    if (y.size() < 2)
        return 0.0;
    return std::sqrt((y.array() - y.mean()).square().sum() / static_cast<double>(y.size()));
}

inline std::pair<LogParams, LogParams> log_bounds(const FitOptions& o, const Hyperparams& init, double y_std)
{
    const double noise_floor = std::max(o.min_noise_std, o.relative_noise_floor * y_std);
    LogParams lo{std::log(o.min_signal_std), std::log(o.min_length), std::log(o.min_length), std::log(noise_floor)};
    LogParams hi{std::log(o.max_signal_std), std::log(o.max_length), std::log(o.max_length), std::log(o.max_noise_std)};
    if (!o.fit_noise)
        lo[3] = hi[3] = std::log(std::max(init.noise_std, 1e-300));
    return {lo, hi};
}

} // namespace detail

/// Initial guess: sigma_s = std(y), length = half the grid span per axis,
/// sigma_n = 0.1 * std(y).
inline Hyperparams default_hyperparams(const Eigen::VectorXd& y, double span_u, double span_v)
{
    const double sd = std::max(detail::population_std(y), 1e-3);
    return {sd, {std::max(span_u, 1e-3) / 2.0, std::max(span_v, 1e-3) / 2.0}, 0.1 * sd};
}

/// Maximizes the log marginal likelihood by projected gradient ascent in
/// log-parameter space. Trial step lengths come from the Barzilai-Borwein
/// rule; a step that does not increase the likelihood is halved.
inline FitResult fit_hyperparams(const Points& x, const Eigen::VectorXd& y, const Hyperparams& init,
                                 const FitOptions& opts = {})
{
    if (x.rows() < 2)
        throw InvalidArgumentError("fit_hyperparams: need at least two training points");
    using detail::LogParams;
    const auto [lo, hi] = detail::log_bounds(opts, init, detail::population_std(y));
    auto project = [&](LogParams p) { return p.cwiseMax(lo).cwiseMin(hi); };
    auto hyper_of = [&](const LogParams& q) {
        Hyperparams h = detail::from_log(q);
        if (!opts.fit_noise)
            h.noise_std = init.noise_std;
        return h;
    };

    LogParams p = project(detail::to_log(init));
    GprModel model(x, y, hyper_of(p));
    double best = model.log_marginal_likelihood();

    FitResult res;
    res.initial_log_likelihood = best;
    res.trace.push_back(best);

    auto log_gradient = [&](const GprModel& m) {
        const HyperGradient g = m.likelihood_gradient();
        const Hyperparams& h = m.hyperparams();
        LogParams grad{g.signal_std * h.signal_std, g.length_scales.x() * h.length_scales.x(),
                       g.length_scales.y() * h.length_scales.y(), g.noise_std * h.noise_std};
        if (!opts.fit_noise)
            grad[3] = 0.0;
        return grad;
    };

    double step = opts.initial_step;
    LogParams grad = log_gradient(model);
    for (int it = 0; it < opts.max_iterations; ++it) {
        // Components pressing against an active bound cannot move.
        LogParams dir = grad;
        for (int i = 0; i < 4; ++i) {
            if ((p[i] <= lo[i] && dir[i] < 0.0) || (p[i] >= hi[i] && dir[i] > 0.0))
                dir[i] = 0.0;
        }
        if (dir.norm() < opts.gradient_tolerance) {
            res.converged = true;
            break;
        }

        bool accepted = false;
        for (int b = 0; b < opts.max_backtracks; ++b) {
            LogParams delta = step * dir;
            if (delta.norm() > opts.max_log_step)
                delta *= opts.max_log_step / delta.norm();
            const LogParams cand = project(p + delta);
            if ((cand - p).norm() == 0.0)
                break;
            try {
                GprModel trial(x, y, hyper_of(cand));
                const double val = trial.log_marginal_likelihood();
                if (std::isfinite(val) && val > best) {
                    const LogParams next_grad = log_gradient(trial);
                    const LogParams ds = cand - p;
                    const double curvature = -ds.dot(next_grad - grad);
                    step = curvature > 0.0 ? std::clamp(ds.squaredNorm() / curvature, 1e-6, 1e3) : 2.0 * step;
                    p = cand;
                    best = val;
                    grad = next_grad;
                    model = std::move(trial);
                    accepted = true;
                    break;
                }
            } catch (const NotPositiveDefiniteError&) {
            }
            step *= 0.5;
        }
        if (!accepted) {
            if (it == 0)
                res.no_ascent = true;
            break;
        }
        res.iterations = it + 1;
        res.trace.push_back(best);
    }

    res.hyperparams = model.hyperparams();
    res.log_likelihood = best;
    if (res.no_ascent)
        res.hyperparams = init;
    return res;
}

} // namespace uavtrack::gpr

#endif
