#include "mombat/preprocess.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <complex>

namespace mombat {

RigidTransform2D estimate_rigid_transform(std::span<const Vec2> prev, std::span<const Vec2> cur) {
    if (prev.size() != cur.size())
        throw Error("registration: point lists differ in length");
    if (prev.size() < 2)
        throw Error("registration: need at least 2 points");

    Vec2 cp{0, 0}, cc{0, 0};
    const double n = static_cast<double>(prev.size());
    for (std::size_t i = 0; i < prev.size(); ++i) {
        cp.x += prev[i].x;
        cp.y += prev[i].y;
        cc.x += cur[i].x;
        cc.y += cur[i].y;
    }
    cp.x /= n;
    cp.y /= n;
    cc.x /= n;
    cc.y /= n;

    double sxx = 0.0, sxy = 0.0, norm_p = 0.0, norm_c = 0.0;
    for (std::size_t i = 0; i < prev.size(); ++i) {
        const double ax = prev[i].x - cp.x, ay = prev[i].y - cp.y;
        const double bx = cur[i].x - cc.x, by = cur[i].y - cc.y;
        sxx += ax * bx + ay * by;
        sxy += ax * by - ay * bx;
        norm_p += ax * ax + ay * ay;
        norm_c += bx * bx + by * by;
    }
    if (norm_p == 0.0 || norm_c == 0.0)
        throw Error("degenerate point set: all points coincident");

    RigidTransform2D t;
    t.theta = (sxx == 0.0 && sxy == 0.0) ? 0.0 : std::atan2(sxy, sxx);
    const double c = std::cos(t.theta), s = std::sin(t.theta);
    t.tx = cc.x - (c * cp.x - s * cp.y);
    t.ty = cc.y - (s * cp.x + c * cp.y);
    return t;
}

RoiGrid build_grid(const FrameImage& first, const FrameImage* mask) {
    if (mask) {
        if (mask->channels != 1) throw Error("mask must be single-channel");
        if (mask->width != first.width || mask->height != first.height)
            throw Error("mask dimensions differ from frame dimensions");
    }

    int x0 = 0, y0 = 0, x1 = first.width - 1, y1 = first.height - 1;
    if (mask) {
        x0 = first.width;
        y0 = first.height;
        x1 = -1;
        y1 = -1;
        for (int y = 0; y < mask->height; ++y) {
            for (int x = 0; x < mask->width; ++x) {
                if (mask->at(x, y, 0) == 255) {
                    x0 = std::min(x0, x);
                    y0 = std::min(y0, y);
                    x1 = std::max(x1, x);
                    y1 = std::max(y1, y);
                }
            }
        }
        if (x1 < 0) throw Error("mask has no skin pixels");
    }

    RoiGrid grid;
    grid.frame_width = first.width;
    grid.frame_height = first.height;
    const int extent_w = x1 - x0 + 1;
    const int extent_h = y1 - y0 + 1;
    grid.side = extent_w / kBlocksAcross;
    if (grid.side < 1)
        throw Error("skin region too narrow: " + std::to_string(extent_w) + " px across");

    for (int row = 0; row * grid.side + grid.side <= extent_h; ++row) {
        for (int col = 0; col < kBlocksAcross; ++col) {
            const int bx = x0 + col * grid.side;
            const int by = y0 + row * grid.side;
            if (mask) {
                long covered = 0;
                for (int v = 0; v < grid.side && covered == 0; ++v)
                    for (int u = 0; u < grid.side; ++u)
                        if (mask->at(bx + u, by + v, 0) == 255) {
                            covered = 1;
                            break;
                        }
                if (covered == 0) continue;
            }
            grid.origins.push_back({static_cast<double>(bx), static_cast<double>(by)});
        }
    }
    if (grid.origins.empty()) throw Error("grid construction produced no blocks");
    return grid;
}

WarpedGrid warp_grid(const RoiGrid& grid, const RigidTransform2D& reg) {
    const RigidTransform2D inv = reg.inverse();
    WarpedGrid out;
    out.corners.resize(grid.blocks());
    out.valid.assign(grid.blocks(), 1);
    const double s = grid.side - 1;
    for (int i = 0; i < grid.blocks(); ++i) {
        const Vec2 o = grid.origins[i];
        out.corners[i] = {inv.apply(o), inv.apply({o.x + s, o.y}), inv.apply({o.x + s, o.y + s}),
                          inv.apply({o.x, o.y + s})};
        double mnx = out.corners[i][0].x, mxx = mnx, mny = out.corners[i][0].y, mxy = mny;
        for (const Vec2& p : out.corners[i]) {
            mnx = std::min(mnx, p.x);
            mxx = std::max(mxx, p.x);
            mny = std::min(mny, p.y);
            mxy = std::max(mxy, p.y);
        }
        if (mxx < -0.5 || mnx > grid.frame_width - 0.5 || mxy < -0.5 || mny > grid.frame_height - 0.5)
            out.valid[i] = 0;
    }
    return out;
}

TemporalSignalSet extract_temporal_signals(const std::vector<FrameImage>& frames,
                                           const std::vector<FrameImage>* masks,
                                           const RoiGrid& grid,
                                           const std::vector<RigidTransform2D>& regs,
                                           Channel channel,
                                           double fps,
                                           kernels::Exec exec) {
    if (frames.size() < 2) throw Error("need at least 2 frames");
    if (regs.size() != frames.size()) throw Error("one registration transform required per frame");
    if (masks && masks->size() != frames.size()) throw Error("one mask required per frame");
    for (std::size_t i = 1; i < frames.size(); ++i)
        if (frames[i].width != frames[0].width || frames[i].height != frames[0].height)
            throw Error("frame " + std::to_string(i) + " dimensions differ from frame 0");
    if (masks)
        for (const FrameImage& m : *masks)
            if (m.channels != 1) throw Error("masks must be single-channel");

    TemporalSignalSet s;
    s.fps = fps;
    s.channel = channel;
    kernels::block_diff_sums(frames, masks, grid, regs, channel == Channel::Green ? 1 : 0, exec,
                             s.signals, s.valid);
    return s;
}

TemporalSignalSet first_difference_signals(const RoiTraceFile& trace, Channel channel) {
    const Eigen::MatrixXd* m = &trace.green;
    if (channel == Channel::Red) {
        if (!trace.red) throw Error("trace file has no red channel");
        m = &*trace.red;
    }
    if (m->cols() < 2) throw Error("trace must cover at least 2 frames");
    TemporalSignalSet s;
    s.fps = trace.fps;
    s.channel = channel;
    s.signals = m->rightCols(m->cols() - 1) - m->leftCols(m->cols() - 1);
    s.valid.assign(static_cast<std::size_t>(m->rows()), 1);
    return s;
}

TemporalSignalSet zscore(TemporalSignalSet s) {
    const int n = s.samples();
    if (n < 2) throw Error("need at least 2 samples per row to z-score");
    for (int r = 0; r < s.rois(); ++r) {
        if (!s.valid[r]) {
            s.signals.row(r).setZero();
            continue;
        }
        const double mean = s.signals.row(r).mean();
        const double var = (s.signals.row(r).array() - mean).square().sum() / (n - 1);
        if (var == 0.0 || !std::isfinite(var)) {
            s.signals.row(r).setZero();
            s.valid[r] = 0;
            continue;
        }
        s.signals.row(r) = (s.signals.row(r).array() - mean) / std::sqrt(var);
    }
    s.normalized = true;
    return s;
}

Eigen::VectorXd detrend(const Eigen::VectorXd& x, double lambda) {
    const Eigen::Index n = x.size();
    if (n < 3) throw Error("signal too short to detrend");
    if (!(lambda > 0.0)) throw Error("detrend lambda must be positive");

    // A = I + lambda^2 D2' D2, pentadiagonal SPD
    const double l2 = lambda * lambda;
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(5 * n));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = std::max<Eigen::Index>(0, i - 2); j <= std::min(n - 1, i + 2); ++j) {
            double v = 0.0;
            for (Eigen::Index k = std::max<Eigen::Index>(0, std::max(i, j) - 2);
                 k <= std::min(std::min(i, j), n - 3); ++k) {
                const auto d = [](Eigen::Index row, Eigen::Index col) {
                    const Eigen::Index off = col - row;
                    return off == 0 ? 1.0 : off == 1 ? -2.0 : off == 2 ? 1.0 : 0.0;
                };
                v += d(k, i) * d(k, j);
            }
            v *= l2;
            if (i == j) v += 1.0;
            if (v != 0.0) trips.emplace_back(static_cast<int>(i), static_cast<int>(j), v);
        }
    }
    Eigen::SparseMatrix<double> a(n, n);
    a.setFromTriplets(trips.begin(), trips.end());
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(a);
    if (llt.info() != Eigen::Success) throw Error("detrend system factorization failed");
    const Eigen::VectorXd trend = llt.solve(x);
    return x - trend;
}

namespace {

struct Biquad {
    double b0, b1, b2, a1, a2;
};

std::complex<double> biquad_response(const Biquad& q, double w) {
    const std::complex<double> z1 = std::polar(1.0, -w);
    const std::complex<double> z2 = z1 * z1;
    return (q.b0 + q.b1 * z1 + q.b2 * z2) / (1.0 + q.a1 * z1 + q.a2 * z2);
}

// Fourth-order Butterworth band-pass as two biquads, unity gain at the
// warped center frequency.
std::array<Biquad, 2> design_bandpass(double fs, double lo, double hi) {
    if (!(lo > 0.0) || !(lo < hi) || !(hi < fs / 2.0))
        throw Error("band edges must satisfy 0 < lo < hi < fps/2");

    const double k = 2.0 * fs;
    const double wl = k * std::tan(M_PI * lo / fs);
    const double wh = k * std::tan(M_PI * hi / fs);
    const double bw = wh - wl;
    const double w0 = std::sqrt(wl * wh);

    // order-2 prototype pole in the upper half plane
    const std::complex<double> proto = std::polar(1.0, 3.0 * M_PI / 4.0);
    const std::complex<double> half = 0.5 * bw * proto;
    const std::complex<double> root = std::sqrt(half * half - w0 * w0);
    const std::array<std::complex<double>, 2> analog = {half + root, half - root};

    std::array<Biquad, 2> sos{};
    const double wc = 2.0 * std::atan(w0 / k);
    for (int i = 0; i < 2; ++i) {
        const std::complex<double> zp = (k + analog[i]) / (k - analog[i]);
        Biquad q{1.0, 0.0, -1.0, -2.0 * zp.real(), std::norm(zp)};
        const double g = std::abs(biquad_response(q, wc));
        q.b0 /= g;
        q.b2 /= g;
        sos[i] = q;
    }
    return sos;
}

constexpr int kOrder = 4;
constexpr int kMinLen = 16;

// Direct-form coefficients of the biquad cascade.
struct Tf {
    std::array<double, kOrder + 1> b{}, a{};
};

Tf combine(const std::array<Biquad, 2>& sos) {
    const std::array<double, 3> b1{sos[0].b0, sos[0].b1, sos[0].b2};
    const std::array<double, 3> a1{1.0, sos[0].a1, sos[0].a2};
    const std::array<double, 3> b2{sos[1].b0, sos[1].b1, sos[1].b2};
    const std::array<double, 3> a2{1.0, sos[1].a1, sos[1].a2};
    Tf f;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            f.b[i + j] += b1[i] * b2[j];
            f.a[i + j] += a1[i] * a2[j];
        }
    return f;
}

// Transposed direct form II; state carries across the whole run.
void lfilter(const Tf& f, const double* x, double* y, Eigen::Index n,
             std::array<double, kOrder> z = {}) {
    for (Eigen::Index i = 0; i < n; ++i) {
        const double xi = x[i];
        const double yi = f.b[0] * xi + z[0];
        z[0] = f.b[1] * xi - f.a[1] * yi + z[1];
        z[1] = f.b[2] * xi - f.a[2] * yi + z[2];
        z[2] = f.b[3] * xi - f.a[3] * yi + z[3];
        z[3] = f.b[4] * xi - f.a[4] * yi;
        y[i] = yi;
    }
}

Eigen::VectorXd lfilter_rev(const Tf& f, const Eigen::VectorXd& x) {
    Eigen::VectorXd r = x.reverse();
    Eigen::VectorXd y(x.size());
    lfilter(f, r.data(), y.data(), x.size());
    y.reverseInPlace();
    return y;
}

// Impulse response length until the slowest pole has decayed below 1e-12.
Eigen::Index response_length(const std::array<Biquad, 2>& sos) {
    double r = 0.0;
    for (const Biquad& q : sos) {
        const double disc = q.a1 * q.a1 - 4.0 * q.a2;
        if (disc < 0.0) {
            r = std::max(r, std::sqrt(q.a2));
        } else {
            const double s = std::sqrt(disc);
            r = std::max({r, std::abs((-q.a1 + s) / 2.0), std::abs((-q.a1 - s) / 2.0)});
        }
    }
    if (r <= 0.0 || r >= 1.0) return 100000;
    const double len = std::log(1e-12) / std::log(r);
    return std::clamp(static_cast<Eigen::Index>(std::ceil(len)), Eigen::Index(32),
                      Eigen::Index(100000));
}

}  // namespace

// Forward-backward filtering with the initial conditions of Gustafsson
// (1996): both ends get states chosen so that filtering forward-backward
// and backward-forward agree, which avoids edge transients entirely.
Eigen::VectorXd bandpass(const Eigen::VectorXd& x, double fps, double lo, double hi) {
    const auto sos = design_bandpass(fps, lo, hi);
    const Eigen::Index n = x.size();
    if (n < kMinLen) throw Error("window too short");
    const Tf f = combine(sos);

    const Eigen::Index irlen = response_length(sos);
    const Eigen::Index m = (n <= 2 * irlen) ? n : irlen;

    // Zero-input response of each state component; columns are shifts.
    Eigen::MatrixXd obs = Eigen::MatrixXd::Zero(m, kOrder);
    {
        Eigen::VectorXd zeros_in = Eigen::VectorXd::Zero(m);
        std::array<double, kOrder> e1{};
        e1[0] = 1.0;
        lfilter(f, zeros_in.data(), obs.col(0).data(), m, e1);
        for (int k = 1; k < kOrder; ++k)
            obs.col(k).tail(m - k) = obs.col(0).head(m - k);
    }
    // Reversed zero-input responses pushed through the filter again.
    Eigen::MatrixXd s(m, kOrder);
    for (int k = 0; k < kOrder; ++k) {
        const Eigen::VectorXd rev = obs.col(k).reverse();
        lfilter(f, rev.data(), s.col(k).data(), m);
    }
    const Eigen::MatrixXd obs_r = obs.colwise().reverse();
    const Eigen::MatrixXd s_r = s.colwise().reverse();

    const Eigen::VectorXd y_f = [&] {
        Eigen::VectorXd y(n);
        lfilter(f, x.data(), y.data(), n);
        return y;
    }();
    const Eigen::VectorXd y_fb = lfilter_rev(f, y_f);
    const Eigen::VectorXd y_b = lfilter_rev(f, x);
    const Eigen::VectorXd y_bf = [&] {
        Eigen::VectorXd y(n);
        lfilter(f, y_b.data(), y.data(), n);
        return y;
    }();

    Eigen::MatrixXd lhs;
    Eigen::VectorXd delta;
    if (m == n) {
        lhs.resize(n, 2 * kOrder);
        lhs << s_r - obs, obs_r - s;
        delta = y_bf - y_fb;
    } else {
        lhs = Eigen::MatrixXd::Zero(2 * m, 2 * kOrder);
        lhs.topLeftCorner(m, kOrder) = s_r - obs;
        lhs.bottomRightCorner(m, kOrder) = obs_r - s;
        delta.resize(2 * m);
        delta.head(m) = y_bf.head(m) - y_fb.head(m);
        delta.tail(m) = y_bf.tail(m) - y_fb.tail(m);
    }
    const Eigen::VectorXd ic = lhs.colPivHouseholderQr().solve(delta);

    Eigen::VectorXd y = y_fb;
    const Eigen::VectorXd head_fix = s_r * ic.head(kOrder);
    const Eigen::VectorXd tail_fix = obs_r * ic.tail(kOrder);
    if (m == n) {
        y += head_fix + tail_fix;
    } else {
        y.head(m) += head_fix;
        y.tail(m) += tail_fix;
    }
    return y;
}

double bandpass_gain(double fps, double lo, double hi, double f) {
    const auto sos = design_bandpass(fps, lo, hi);
    const double w = 2.0 * M_PI * f / fps;
    double g = 1.0;
    for (const Biquad& q : sos) g *= std::abs(biquad_response(q, w));
    return g * g;  // forward and backward pass
}

}  // namespace mombat
