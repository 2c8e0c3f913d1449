#include "frugal/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace frugal {

namespace {

struct P2 {
    double x;
    double y;
};

using Stroke = std::vector<P2>;

// Glyph templates in a unit box, y pointing down. Coarse polylines are
// enough; jitter, thickness, and blur do the rest.
std::vector<Stroke> glyph_strokes(int digit) {
    auto ring = [](double cx, double cy, double rx, double ry, int n) {
        Stroke s;
        for (int i = 0; i <= n; ++i) {
            const double a = 2.0 * M_PI * i / n;
            s.push_back({cx + rx * std::sin(a), cy - ry * std::cos(a)});
        }
        return s;
    };
    switch (digit) {
        case 0:
            return {ring(0.50, 0.50, 0.155, 0.245, 16)};
        case 1:
            return {{{0.42, 0.33}, {0.52, 0.25}, {0.52, 0.75}},
                    {{0.42, 0.75}, {0.62, 0.75}}};
        case 2:
            return {{{0.37, 0.36},
                     {0.40, 0.28},
                     {0.50, 0.25},
                     {0.60, 0.28},
                     {0.63, 0.37},
                     {0.58, 0.47},
                     {0.38, 0.64},
                     {0.36, 0.73},
                     {0.65, 0.73}}};
        case 3:
            return {{{0.38, 0.29},
                     {0.50, 0.25},
                     {0.61, 0.31},
                     {0.60, 0.41},
                     {0.50, 0.47},
                     {0.61, 0.53},
                     {0.63, 0.64},
                     {0.52, 0.74},
                     {0.38, 0.70}}};
        case 4:
            return {{{0.56, 0.25}, {0.36, 0.56}, {0.67, 0.56}},
                    {{0.58, 0.38}, {0.58, 0.76}}};
        case 5:
            return {{{0.63, 0.25},
                     {0.40, 0.25},
                     {0.38, 0.47},
                     {0.52, 0.44},
                     {0.62, 0.51},
                     {0.63, 0.64},
                     {0.51, 0.74},
                     {0.37, 0.69}}};
        case 6:
            return {{{0.60, 0.26},
                     {0.46, 0.33},
                     {0.39, 0.46},
                     {0.38, 0.62},
                     {0.46, 0.74},
                     {0.57, 0.71},
                     {0.62, 0.60},
                     {0.55, 0.51},
                     {0.41, 0.55}}};
        case 7:
            return {{{0.36, 0.26}, {0.64, 0.26}, {0.46, 0.75}},
                    {{0.42, 0.51}, {0.59, 0.51}}};
        case 8:
            return {ring(0.50, 0.36, 0.115, 0.115, 12), ring(0.50, 0.62, 0.145, 0.135, 12)};
        case 9:
            return {ring(0.52, 0.37, 0.125, 0.115, 12),
                    {{0.645, 0.37}, {0.62, 0.58}, {0.51, 0.75}}};
        default:
            throw std::invalid_argument("glyph_strokes: digit must be 0..9");
    }
}

double dist_to_segment(double px, double py, const P2& a, const P2& b) {
    const double vx = b.x - a.x;
    const double vy = b.y - a.y;
    const double len2 = vx * vx + vy * vy;
    double t = 0.0;
    if (len2 > 0.0) {
        t = ((px - a.x) * vx + (py - a.y) * vy) / len2;
        t = std::clamp(t, 0.0, 1.0);
    }
    const double dx = px - (a.x + t * vx);
    const double dy = py - (a.y + t * vy);
    return std::sqrt(dx * dx + dy * dy);
}

}  // namespace

DigitSet render_digit_set(const DigitSetConfig& cfg) {
    if (cfg.per_class <= 0 || cfg.h < 12 || cfg.w < 12) {
        throw std::invalid_argument("render_digit_set: bad config");
    }
    const int n = cfg.per_class * 10;
    const long plane = static_cast<long>(cfg.h) * cfg.w;

    DigitSet out;
    out.images.dims = {n, cfg.h, cfg.w};
    out.images.bytes.resize(static_cast<size_t>(n) * plane);
    out.labels.dims = {n};
    out.labels.bytes.resize(static_cast<size_t>(n));

    Rng root(cfg.seed);
    std::vector<int> order(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i % 10;
    root.fork(0x0DDEull).shuffle(order);

    std::vector<double> canvas(static_cast<size_t>(plane));
    std::vector<double> blurred(static_cast<size_t>(plane));

    for (int s = 0; s < n; ++s) {
        const int digit = order[static_cast<size_t>(s)];
        Rng rng = root.fork(0x1000ull + static_cast<uint64_t>(s));

        // sample one glyph pose
        const double angle = rng.next_double() * 0.30 - 0.15;
        const double scale = 0.85 + rng.next_double() * 0.25;
        const double shear = rng.next_double() * 0.20 - 0.10;
        const double tx = (rng.next_double() - 0.5) * 0.10;
        const double ty = (rng.next_double() - 0.5) * 0.10;
        const double thickness = (0.9 + rng.next_double() * 0.7) / 28.0;
        const double brightness = 0.80 + rng.next_double() * 0.20;
        const double ca = std::cos(angle);
        const double sa = std::sin(angle);

        std::vector<Stroke> strokes = glyph_strokes(digit);
        for (Stroke& st : strokes) {
            for (P2& p : st) {
                double x = p.x - 0.5;
                double y = p.y - 0.5;
                x += shear * y;
                const double rx = ca * x - sa * y;
                const double ry = sa * x + ca * y;
                p.x = 0.5 + scale * rx + tx;
                p.y = 0.5 + scale * ry + ty;
            }
        }

        const double aa = 0.8 / 28.0;
        for (int py = 0; py < cfg.h; ++py) {
            for (int px = 0; px < cfg.w; ++px) {
                const double ux = (px + 0.5) / cfg.w;
                const double uy = (py + 0.5) / cfg.h;
                double best = 1e9;
                for (const Stroke& st : strokes) {
                    for (size_t k = 0; k + 1 < st.size(); ++k) {
                        best = std::min(best, dist_to_segment(ux, uy, st[k], st[k + 1]));
                    }
                }
                const double v = std::clamp((thickness - best) / aa + 1.0, 0.0, 1.0);
                canvas[static_cast<size_t>(py) * cfg.w + px] = v;
            }
        }

        // soft 3x3 blur, then brightness, noise, and quantization
        for (int py = 0; py < cfg.h; ++py) {
            for (int px = 0; px < cfg.w; ++px) {
                double acc = 0.0;
                double wsum = 0.0;
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int qy = py + dy;
                        const int qx = px + dx;
                        if (qy < 0 || qy >= cfg.h || qx < 0 || qx >= cfg.w) continue;
                        const double kw = (dx == 0 && dy == 0) ? 4.0 : ((dx == 0 || dy == 0) ? 2.0 : 1.0);
                        acc += kw * canvas[static_cast<size_t>(qy) * cfg.w + qx];
                        wsum += kw;
                    }
                }
                blurred[static_cast<size_t>(py) * cfg.w + px] = acc / wsum;
            }
        }

        uint8_t* dst = out.images.bytes.data() + static_cast<long>(s) * plane;
        for (long k = 0; k < plane; ++k) {
            double v = blurred[static_cast<size_t>(k)] * brightness * 255.0;
            v += (rng.next_double() - 0.5) * 16.0;
            dst[k] = static_cast<uint8_t>(std::clamp(v, 0.0, 255.0));
        }
        out.labels.bytes[static_cast<size_t>(s)] = static_cast<uint8_t>(digit);
    }
    return out;
}

// ---------------------------------------------------------------------------
// difficulty-graded stream
// ---------------------------------------------------------------------------

SyntheticStream::SyntheticStream(StreamConfig cfg) : cfg_(cfg), rng_(cfg.seed) {
    if (cfg_.batch <= 0 || cfg_.h <= 1 || cfg_.w <= 1) {
        throw std::invalid_argument("SyntheticStream: bad config");
    }
    if (cfg_.hard_fraction <= 0.0 || cfg_.hard_fraction >= 1.0) {
        throw std::invalid_argument("SyntheticStream: hard_fraction must be inside (0, 1)");
    }
}

double SyntheticStream::decay() const {
    return std::exp(-static_cast<double>(seen_) / cfg_.tau);
}

StreamBatch SyntheticStream::next() {
    const int m = cfg_.batch;
    const int n_hard = std::max(1, static_cast<int>(std::lround(cfg_.hard_fraction * m)));
    const int n_easy = m - n_hard;
    const double amp = cfg_.loss_scale * decay();

    StreamBatch b;
    b.x = Tensor({m, 1, cfg_.h, cfg_.w});
    b.difficulty.resize(static_cast<size_t>(m));
    b.losses.resize(static_cast<size_t>(m));
    b.labels.resize(static_cast<size_t>(m));

    // stratified difficulties: each group tiles its half of [0, 1) evenly,
    // with a small in-cell jitter
    std::vector<double> diffs;
    diffs.reserve(static_cast<size_t>(m));
    for (int i = 0; i < n_easy; ++i) {
        diffs.push_back(0.5 * (i + rng_.next_double()) / n_easy);
    }
    for (int i = 0; i < n_hard; ++i) {
        diffs.push_back(0.5 + 0.5 * (i + rng_.next_double()) / n_hard);
    }
    rng_.shuffle(diffs);

    for (int i = 0; i < m; ++i) {
        const double d = diffs[static_cast<size_t>(i)];
        const int cls = rng_.next_below(2) == 0 ? 0 : 1;
        const double contrast = 1.0 - 0.75 * d;
        const double noise_amp = cfg_.noise * (0.25 + 1.5 * d);

        for (int y = 0; y < cfg_.h; ++y) {
            const bool top = y < cfg_.h / 2;
            const double base = ((top && cls == 0) || (!top && cls == 1)) ? contrast : 0.0;
            for (int x = 0; x < cfg_.w; ++x) {
                b.x(i, 0, y, x) = base + rng_.next_normal(0.0, noise_amp);
            }
        }

        b.difficulty[static_cast<size_t>(i)] = d;
        const double jit = 1.0 + cfg_.loss_jitter * (2.0 * rng_.next_double() - 1.0);
        b.losses[static_cast<size_t>(i)] = d * amp * jit;
        b.labels[static_cast<size_t>(i)] = cls;
    }
    seen_ += m;
    return b;
}

}  // namespace frugal
