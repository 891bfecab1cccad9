#pragma once

// Seeded, chunked Monte-Carlo driver with standard errors.
//
// A run of S samples is cut into a fixed number of chunks. Chunk c draws from
// its own jump-separated substream and owns a private accumulator; chunk
// results are merged in chunk order. The estimate therefore depends only on
// (seed, stream_index, samples), never on the worker count or scheduling.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "ocft/errors.hpp"
#include "ocft/linalg.hpp"
#include "ocft/rng.hpp"

namespace ocft {

struct Estimate {
    Complex mean{};
    double std_error = 0.0;
    std::size_t samples = 0;
};

/// Default worker count: $OCFT_WORKERS if set and positive, else 1.
inline unsigned default_workers() {
    if (const char* env = std::getenv("OCFT_WORKERS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return unsigned(v);
    }
    return 1;
}

struct McConfig {
    std::size_t samples = 100000;
    RngStream rng{};
    unsigned workers = default_workers();
    std::size_t max_chunks = 64;
};

/// Per-component mean and variance (Chan/Welford merge), complex valued.
class MeanAccumulator {
public:
    explicit MeanAccumulator(std::size_t dim = 0) : mean_(dim), m2_(dim, 0.0) {}

    std::size_t dim() const noexcept { return mean_.size(); }
    std::size_t count() const noexcept { return n_; }

    void add(std::span<const Complex> f) {
        ++n_;
        const double inv = 1.0 / double(n_);
        for (std::size_t k = 0; k < mean_.size(); ++k) {
            const Complex d = f[k] - mean_[k];
            mean_[k] += d * inv;
            m2_[k] += std::real(std::conj(d) * (f[k] - mean_[k]));
        }
    }

    void merge(const MeanAccumulator& o) {
        if (o.n_ == 0) return;
        if (n_ == 0) {
            *this = o;
            return;
        }
        const double na = double(n_), nb = double(o.n_), n = na + nb;
        for (std::size_t k = 0; k < mean_.size(); ++k) {
            const Complex d = o.mean_[k] - mean_[k];
            mean_[k] += d * (nb / n);
            m2_[k] += o.m2_[k] + std::norm(d) * na * nb / n;
        }
        n_ += o.n_;
    }

    /// Mean with plug-in standard error sqrt(var / n).
    std::vector<Estimate> estimates() const {
        std::vector<Estimate> out(mean_.size());
        for (std::size_t k = 0; k < mean_.size(); ++k) {
            const double var = n_ > 1 ? std::max(m2_[k], 0.0) / double(n_ - 1) : 0.0;
            out[k] = {mean_[k], n_ > 0 ? std::sqrt(var / double(n_)) : 0.0, n_};
        }
        return out;
    }

private:
    std::size_t n_ = 0;
    std::vector<Complex> mean_;
    std::vector<double> m2_;
};

/// Self-normalised importance-sampling accumulator: estimates
/// sum(w f) / sum(w) with the delta-method standard error.
class WeightedAccumulator {
public:
    explicit WeightedAccumulator(std::size_t dim = 0)
        : wf_(dim), w2f_(dim), w2f2_(dim, 0.0) {}

    std::size_t dim() const noexcept { return wf_.size(); }
    std::size_t count() const noexcept { return n_; }

    void add(double w, std::span<const Complex> f) {
        ++n_;
        sw_ += w;
        sw2_ += w * w;
        for (std::size_t k = 0; k < wf_.size(); ++k) {
            wf_[k] += w * f[k];
            w2f_[k] += w * w * f[k];
            w2f2_[k] += w * w * std::norm(f[k]);
        }
    }

    void merge(const WeightedAccumulator& o) {
        n_ += o.n_;
        sw_ += o.sw_;
        sw2_ += o.sw2_;
        for (std::size_t k = 0; k < wf_.size(); ++k) {
            wf_[k] += o.wf_[k];
            w2f_[k] += o.w2f_[k];
            w2f2_[k] += o.w2f2_[k];
        }
    }

    double weight_sum() const noexcept { return sw_; }

    /// Kish effective sample size (sum w)^2 / sum w^2.
    double effective_samples() const { return sw2_ > 0.0 ? sw_ * sw_ / sw2_ : 0.0; }

    std::vector<Estimate> estimates() const {
        std::vector<Estimate> out(wf_.size());
        for (std::size_t k = 0; k < wf_.size(); ++k) {
            if (sw_ == 0.0) {
                out[k] = {Complex{}, 0.0, n_};
                continue;
            }
            const Complex mu = wf_[k] / sw_;
            const double num = w2f2_[k] - 2.0 * std::real(std::conj(mu) * w2f_[k]) +
                               std::norm(mu) * sw2_;
            out[k] = {mu, std::sqrt(std::max(num, 0.0)) / sw_, n_};
        }
        return out;
    }

private:
    std::size_t n_ = 0;
    double sw_ = 0.0;
    double sw2_ = 0.0;
    std::vector<Complex> wf_;
    std::vector<Complex> w2f_;
    std::vector<double> w2f2_;
};

/// Runs `body(engine, accumulator)` once per sample over deterministic chunks
/// and returns the merged accumulator. `proto` is an empty accumulator used as
/// the template for each chunk. `body` is invoked concurrently and must not
/// mutate shared state.
template <class Acc, class Body>
Acc run_monte_carlo(const McConfig& cfg, const Acc& proto, Body&& body) {
    if (cfg.samples == 0) throw ConfigError("monte carlo: zero samples requested");
    const std::size_t chunks = std::max<std::size_t>(1, std::min(cfg.max_chunks, cfg.samples));
    const unsigned workers = std::max(1u, std::min<unsigned>(cfg.workers, unsigned(chunks)));

    std::vector<Xoshiro256pp> engines;
    engines.reserve(chunks);
    Xoshiro256pp e = RngStream{cfg.rng.seed, cfg.rng.stream_index * cfg.max_chunks}.engine();
    for (std::size_t c = 0; c < chunks; ++c) {
        engines.push_back(e);
        e.jump();
    }

    std::vector<Acc> partial(chunks, proto);
    std::vector<std::exception_ptr> failures(workers);
    auto work = [&](unsigned w) {
        try {
            for (std::size_t c = w; c < chunks; c += workers) {
                const std::size_t count =
                    cfg.samples / chunks + (c < cfg.samples % chunks ? 1 : 0);
                Xoshiro256pp& eng = engines[c];
                for (std::size_t s = 0; s < count; ++s) body(eng, partial[c]);
            }
        } catch (...) {
            failures[w] = std::current_exception();
        }
    };

    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
        for (auto& t : pool) t.join();
    }
    for (const auto& f : failures)
        if (f) std::rethrow_exception(f);

    Acc total = proto;
    for (const auto& p : partial) total.merge(p);
    return total;
}

}  // namespace ocft
