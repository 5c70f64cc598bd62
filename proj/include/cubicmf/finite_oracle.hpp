#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "cubicmf/model.hpp"
#include "cubicmf/parallel.hpp"
#include "cubicmf/rng.hpp"
#include "cubicmf/solver.hpp"

namespace cubicmf {

/// Exact finite-N Gibbs averages. p_N is the per-agent log partition
/// function (1/N) log Z_N; the moments are of the (combined) average
/// opinion.
struct ExactResult {
    double p_N = 0.0;
    double mean_m = 0.0;
    double mean_abs_m = 0.0;
    double mean_m2 = 0.0;
};

struct MCConfig {
    std::int64_t total_sweeps = 10000;
    std::int64_t burn_in_sweeps = 1000;
    std::uint64_t seed = 0;
    std::int64_t thinning = 1;
};

inline void validate(const MCConfig& c) {
    if (c.total_sweeps < 1) throw std::invalid_argument("MCConfig: total_sweeps must be >= 1");
    if (c.burn_in_sweeps < 0 || c.burn_in_sweeps >= c.total_sweeps)
        throw std::invalid_argument("MCConfig: burn_in_sweeps must be in [0, total_sweeps)");
    if (c.thinning < 1) throw std::invalid_argument("MCConfig: thinning must be >= 1");
}

struct MCResult {
    double mean_m = 0.0;
    double std_error = 0.0;  // batch-means estimate, 30 batches
    std::int64_t n_samples = 0;
};

namespace detail {

// Online log-sum-exp accumulator carrying the weighted moments of m.
struct SectorAccumulator {
    double max_log = -std::numeric_limits<double>::infinity();
    double w = 0.0, wm = 0.0, wabs = 0.0, wm2 = 0.0;

    void add(double log_weight, double m) {
        if (log_weight > max_log) {
            const double scale = std::exp(max_log - log_weight);
            w *= scale;
            wm *= scale;
            wabs *= scale;
            wm2 *= scale;
            max_log = log_weight;
        }
        const double e = std::exp(log_weight - max_log);
        w += e;
        wm += e * m;
        wabs += e * std::fabs(m);
        wm2 += e * m * m;
    }

    // Merge another accumulator; call in a fixed order so results do not
    // depend on the thread count.
    void merge(const SectorAccumulator& o) {
        if (o.w == 0.0) return;
        if (o.max_log > max_log) {
            const double scale = std::exp(max_log - o.max_log);
            w *= scale;
            wm *= scale;
            wabs *= scale;
            wm2 *= scale;
            max_log = o.max_log;
        }
        const double scale = std::exp(o.max_log - max_log);
        w += scale * o.w;
        wm += scale * o.wm;
        wabs += scale * o.wabs;
        wm2 += scale * o.wm2;
    }
};

inline std::vector<double> log_binomials(std::int64_t n) {
    std::vector<double> lb(static_cast<std::size_t>(n) + 1);
    const double lgn = std::lgamma(static_cast<double>(n) + 1.0);
    for (std::int64_t k = 0; k <= n; ++k)
        lb[k] = lgn - std::lgamma(static_cast<double>(k) + 1.0) -
                std::lgamma(static_cast<double>(n - k) + 1.0);
    return lb;
}

}  // namespace detail

/// Exact one-component Gibbs averages by magnetization-sector enumeration:
///   Z_N = sum_k C(N,k) exp(N U(m_k)),  m_k = (2k - N)/N.
/// The Hamiltonian is constant on sectors, so the 2^N configurations reduce
/// to N+1 terms; everything is accumulated in the log domain.
inline ExactResult exact_one(const OneComponentParams& p, std::int64_t N) {
    validate(p);
    if (N < 1) throw std::invalid_argument("exact_one: N must be >= 1");
    if (N > 10000000) throw std::invalid_argument("exact_one: N exceeds the 1e7 cap");

    detail::SectorAccumulator acc;
    const double lgn = std::lgamma(static_cast<double>(N) + 1.0);
    const double dN = static_cast<double>(N);
    for (std::int64_t k = 0; k <= N; ++k) {
        const double m = (2.0 * static_cast<double>(k) - dN) / dN;
        const double log_c = lgn - std::lgamma(static_cast<double>(k) + 1.0) -
                             std::lgamma(static_cast<double>(N - k) + 1.0);
        acc.add(log_c + dN * energy_one(p, m), m);
    }
    ExactResult r;
    r.p_N = (acc.max_log + std::log(acc.w)) / dN;
    r.mean_m = acc.wm / acc.w;
    r.mean_abs_m = acc.wabs / acc.w;
    r.mean_m2 = acc.wm2 / acc.w;
    return r;
}

/// Exact two-component averages over sector pairs (k1, k2), weight
/// C(N1,k1) C(N2,k2) exp(N U(m1, m2)). The relative size alpha is derived
/// as N1/N, overriding the value stored in the parameters; an empty
/// component contributes weight zero and its magnetization is immaterial.
/// Moments are of the combined order parameter (N1 m1 + N2 m2)/N.
inline ExactResult exact_two(const TwoComponentParams& params, std::int64_t N1,
                             std::int64_t N2, unsigned threads = 1) {
    validate(params);
    if (N1 < 0 || N2 < 0 || N1 + N2 < 1)
        throw std::invalid_argument("exact_two: need N1, N2 >= 0 with N1 + N2 >= 1");
    if (N1 > 10000000 || N2 > 10000000)
        throw std::invalid_argument("exact_two: component size exceeds the 1e7 cap");
    if (N1 * N2 > 100000000)
        throw std::invalid_argument("exact_two: N1*N2 exceeds the 1e8 cap");

    const std::int64_t N = N1 + N2;
    const double dN = static_cast<double>(N);
    TwoComponentParams p = params;
    p.alpha = static_cast<double>(N1) / dN;

    const auto lb1 = detail::log_binomials(N1);
    const auto lb2 = detail::log_binomials(N2);

    // Each chunk covers a fixed k1 range and the combine order is fixed, so
    // the result is bit-identical for every thread count.
    const std::int64_t n_chunks = std::min<std::int64_t>(N1 + 1, 256);
    std::vector<detail::SectorAccumulator> chunks(static_cast<std::size_t>(n_chunks));

    parallel_for(chunks.size(), threads, [&](std::size_t c) {
        const std::int64_t lo = static_cast<std::int64_t>(c) * (N1 + 1) / n_chunks;
        const std::int64_t hi = static_cast<std::int64_t>(c + 1) * (N1 + 1) / n_chunks;
        detail::SectorAccumulator& acc = chunks[c];
        for (std::int64_t k1 = lo; k1 < hi; ++k1) {
            const double m1 = N1 > 0 ? (2.0 * static_cast<double>(k1) - N1) / N1 : 0.0;
            for (std::int64_t k2 = 0; k2 <= N2; ++k2) {
                const double m2 = N2 > 0 ? (2.0 * static_cast<double>(k2) - N2) / N2 : 0.0;
                const double log_w = lb1[k1] + lb2[k2] + dN * energy_two(p, {m1, m2});
                acc.add(log_w, (N1 * m1 + N2 * m2) / dN);
            }
        }
    });

    detail::SectorAccumulator total;
    for (const auto& chunk : chunks) total.merge(chunk);
    ExactResult r;
    r.p_N = (total.max_log + std::log(total.w)) / dN;
    r.mean_m = total.wm / total.w;
    r.mean_abs_m = total.wabs / total.w;
    r.mean_m2 = total.wm2 / total.w;
    return r;
}

/// Single-spin-flip Metropolis for the two-component model with sizes
/// (N1, N2); alpha is derived from the sizes. One sweep proposes N flips at
/// uniformly random sites; acceptance is min(1, exp(-dH)) with dH computed
/// from the sector magnetization change. The chain is strictly sequential
/// and bit-reproducible for a given seed (splitmix64).
inline MCResult metropolis(const TwoComponentParams& params, std::int64_t N1,
                           std::int64_t N2, const MCConfig& mc) {
    validate(params);
    validate(mc);
    const std::int64_t N = N1 + N2;
    if (N < 2) throw std::invalid_argument("metropolis: N must be >= 2");
    if (N1 < 0 || N2 < 0) throw std::invalid_argument("metropolis: sizes must be >= 0");

    const double dN = static_cast<double>(N);
    TwoComponentParams p = params;
    p.alpha = static_cast<double>(N1) / dN;

    SplitMix64 rng(mc.seed);
    std::vector<std::int8_t> spin(static_cast<std::size_t>(N));
    std::int64_t up1 = 0, up2 = 0;
    for (std::int64_t i = 0; i < N; ++i) {
        const bool up = rng.next_u64() >> 63;
        spin[i] = up ? 1 : -1;
        if (up) (i < N1 ? up1 : up2)++;
    }
    const auto mag = [&](std::int64_t up, std::int64_t n) {
        return n > 0 ? (2.0 * static_cast<double>(up) - n) / n : 0.0;
    };

    double sum = 0.0;
    std::vector<double> samples;
    samples.reserve(static_cast<std::size_t>(
        (mc.total_sweeps - mc.burn_in_sweeps + mc.thinning - 1) / mc.thinning));

    for (std::int64_t sweep = 0; sweep < mc.total_sweeps; ++sweep) {
        for (std::int64_t step = 0; step < N; ++step) {
            const std::int64_t site =
                static_cast<std::int64_t>(rng.next_index(static_cast<std::uint64_t>(N)));
            const bool in1 = site < N1;
            const std::int64_t d = spin[site] > 0 ? -1 : 1;
            const double u_old = energy_two(p, {mag(up1, N1), mag(up2, N2)});
            const double u_new = energy_two(
                p, {mag(up1 + (in1 ? d : 0), N1), mag(up2 + (in1 ? 0 : d), N2)});
            const double log_accept = dN * (u_new - u_old);  // -dH
            if (log_accept >= 0.0 || rng.next_double() < std::exp(log_accept)) {
                spin[site] = static_cast<std::int8_t>(-spin[site]);
                (in1 ? up1 : up2) += d;
            }
        }
        if (sweep >= mc.burn_in_sweeps &&
            (sweep - mc.burn_in_sweeps) % mc.thinning == 0) {
            const double m = (N1 * mag(up1, N1) + N2 * mag(up2, N2)) / dN;
            samples.push_back(m);
            sum += m;
        }
    }

    MCResult r;
    r.n_samples = static_cast<std::int64_t>(samples.size());
    r.mean_m = sum / static_cast<double>(r.n_samples);

    const std::int64_t B = std::min<std::int64_t>(30, r.n_samples);
    const std::int64_t batch = r.n_samples / B;
    if (B >= 2 && batch >= 1) {
        std::vector<double> means(static_cast<std::size_t>(B), 0.0);
        for (std::int64_t b = 0; b < B; ++b) {
            double s = 0.0;
            for (std::int64_t i = 0; i < batch; ++i)
                s += samples[static_cast<std::size_t>(b * batch + i)];
            means[b] = s / static_cast<double>(batch);
        }
        double mu = 0.0;
        for (double v : means) mu += v;
        mu /= static_cast<double>(B);
        double var = 0.0;
        for (double v : means) var += (v - mu) * (v - mu);
        var /= static_cast<double>(B - 1);
        r.std_error = std::sqrt(var / static_cast<double>(B));
    }
    return r;
}

/// One-component Metropolis; mapped onto the two-component sampler with an
/// empty second group, whose energy reduces exactly to U(m).
inline MCResult metropolis(const OneComponentParams& params, std::int64_t N,
                           const MCConfig& mc) {
    TwoComponentParams p;
    p.K111 = params.K;
    p.J11 = params.J;
    p.h1 = params.h;
    p.alpha = 1.0;
    return metropolis(p, N, 0, mc);
}

struct ConvergenceRow {
    std::int64_t N = 0;
    double p_N = 0.0;
    double gap = 0.0;  // p_N - p_limit
};

/// Gap sequence p_N - p against the variational limit computed by the
/// solver.
inline std::vector<ConvergenceRow> convergence_report(const OneComponentParams& p,
                                                      const std::vector<std::int64_t>& sizes,
                                                      const SolverConfig& config = {}) {
    const double p_limit = variational_p(p, config);
    std::vector<ConvergenceRow> rows;
    rows.reserve(sizes.size());
    for (std::int64_t n : sizes) {
        const double pn = exact_one(p, n).p_N;
        rows.push_back({n, pn, pn - p_limit});
    }
    return rows;
}

}  // namespace cubicmf
