#include "gesturescope/tsne.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gesturescope {

std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t h) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Uniform in (0, 1).
double unit(std::uint64_t& state) {
    return (static_cast<double>(splitmix64(state) >> 11) + 0.5) * (1.0 / 9007199254740992.0);
}

// Row-wise Gaussian affinities calibrated by bisection on the precision so
// that each row's entropy matches log(perplexity).
std::vector<double> conditional_affinities(const std::vector<double>& d2, std::size_t n, double perplexity) {
    std::vector<double> p(n * n, 0.0);
    const double target = std::log(perplexity);
    constexpr double tol = 1e-5;
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = &d2[i * n];
        double* out = &p[i * n];
        double beta = 1.0;
        double lo = -std::numeric_limits<double>::max();
        double hi = std::numeric_limits<double>::max();
        // Shift by the smallest off-diagonal distance to avoid underflow.
        double dmin = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) dmin = std::min(dmin, row[j]);
        }
        for (int iter = 0; iter < 200; ++iter) {
            double sum = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                out[j] = j == i ? 0.0 : std::exp(-beta * (row[j] - dmin));
                sum += out[j];
            }
            double h = 0.0;
            for (std::size_t j = 0; j < n; ++j) h += beta * (row[j] - dmin) * out[j];
            h = h / sum + std::log(sum);
            for (std::size_t j = 0; j < n; ++j) out[j] /= sum;

            const double diff = h - target;
            if (std::abs(diff) < tol) break;
            if (diff > 0) {
                lo = beta;
                beta = hi == std::numeric_limits<double>::max() ? beta * 2.0 : (beta + hi) / 2.0;
            } else {
                hi = beta;
                beta = lo == -std::numeric_limits<double>::max() ? beta / 2.0 : (beta + lo) / 2.0;
            }
        }
    }
    return p;
}

}  // namespace

std::vector<Point2> tsne_embed(const std::vector<double>& d2_in, std::size_t n,
                               const std::vector<std::uint64_t>& item_keys_in, const TsneParams& params) {
    // Work in key order so floating-point sums do not depend on how the
    // caller ordered the items; results are mapped back at the end.
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return item_keys_in[a] < item_keys_in[b]; });
    std::vector<double> d2(n * n);
    std::vector<std::uint64_t> item_keys(n);
    for (std::size_t i = 0; i < n; ++i) {
        item_keys[i] = item_keys_in[order[i]];
        for (std::size_t j = 0; j < n; ++j) d2[i * n + j] = d2_in[order[i] * n + order[j]];
    }

    std::vector<double> cond = conditional_affinities(d2, n, params.perplexity);
    std::vector<double> p(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            p[i * n + j] = std::max((cond[i * n + j] + cond[j * n + i]) / (2.0 * static_cast<double>(n)), 1e-12);
        }
    }

    std::vector<double> y(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t state = params.seed ^ item_keys[i];
        const double u1 = unit(state);
        const double u2 = unit(state);
        const double r = std::sqrt(-2.0 * std::log(u1));
        y[2 * i] = 1e-4 * r * std::cos(2.0 * M_PI * u2);
        y[2 * i + 1] = 1e-4 * r * std::sin(2.0 * M_PI * u2);
    }

    std::vector<double> update(2 * n, 0.0);
    std::vector<double> gains(2 * n, 1.0);
    std::vector<double> grad(2 * n);
    std::vector<double> num(n * n);

    for (int iter = 0; iter < params.iterations; ++iter) {
        const double exaggeration = iter < params.exaggeration_iterations ? params.early_exaggeration : 1.0;
        const double momentum = iter < params.exaggeration_iterations ? 0.5 : 0.8;

        double qsum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            num[i * n + i] = 0.0;
            for (std::size_t j = i + 1; j < n; ++j) {
                const double dx = y[2 * i] - y[2 * j];
                const double dy = y[2 * i + 1] - y[2 * j + 1];
                const double q = 1.0 / (1.0 + dx * dx + dy * dy);
                num[i * n + j] = q;
                num[j * n + i] = q;
                qsum += 2.0 * q;
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            double gx = 0.0;
            double gy = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                const double q = num[i * n + j];
                const double mult = (exaggeration * p[i * n + j] - std::max(q / qsum, 1e-12)) * q;
                gx += mult * (y[2 * i] - y[2 * j]);
                gy += mult * (y[2 * i + 1] - y[2 * j + 1]);
            }
            grad[2 * i] = 4.0 * gx;
            grad[2 * i + 1] = 4.0 * gy;
        }
        for (std::size_t k = 0; k < 2 * n; ++k) {
            const bool same_sign = (grad[k] > 0) == (update[k] > 0);
            gains[k] = same_sign ? gains[k] * 0.8 : gains[k] + 0.2;
            gains[k] = std::max(gains[k], 0.01);
            update[k] = momentum * update[k] - params.learning_rate * gains[k] * grad[k];
            y[k] += update[k];
        }
        double mx = 0.0;
        double my = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            mx += y[2 * i];
            my += y[2 * i + 1];
        }
        mx /= static_cast<double>(n);
        my /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
            y[2 * i] -= mx;
            y[2 * i + 1] -= my;
        }
    }

    std::vector<Point2> out(n);
    for (std::size_t i = 0; i < n; ++i) out[order[i]] = {y[2 * i], y[2 * i + 1]};
    return out;
}

}  // namespace gesturescope
