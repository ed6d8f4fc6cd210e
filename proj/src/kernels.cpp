#include "mombat/kernels.hpp"

#include <cmath>

namespace mombat::kernels {

namespace {

struct BlockSampleCtx {
    const std::vector<FrameImage>* frames;
    const std::vector<FrameImage>* masks;
    const RoiGrid* grid;
    const std::vector<RigidTransform2D>* warps;  // reference -> frame-k coords
    int channel;
};

inline bool sample_pixel(const BlockSampleCtx& ctx, int frame, Vec2 ref_pos, double& value) {
    const Vec2 p = (*ctx.warps)[frame].apply(ref_pos);
    const int xi = static_cast<int>(std::lround(p.x));
    const int yi = static_cast<int>(std::lround(p.y));
    const FrameImage& img = (*ctx.frames)[frame];
    if (xi < 0 || yi < 0 || xi >= img.width || yi >= img.height) return false;
    if (ctx.masks) {
        const FrameImage& m = (*ctx.masks)[frame];
        if (m.at(xi, yi, 0) != 255) return false;
    }
    const int ch = img.channels == 1 ? 0 : ctx.channel;
    value = static_cast<double>(img.at(xi, yi, ch));
    return true;
}

// One (block, sample) cell: difference sum between frames k+1 and k.
inline void block_cell(const BlockSampleCtx& ctx, int block, int k, double& sum, long& count) {
    const RoiGrid& grid = *ctx.grid;
    const Vec2 origin = grid.origins[block];
    sum = 0.0;
    count = 0;
    for (int v = 0; v < grid.side; ++v) {
        for (int u = 0; u < grid.side; ++u) {
            const Vec2 ref_pos{origin.x + u, origin.y + v};
            double a = 0.0, b = 0.0;
            if (!sample_pixel(ctx, k, ref_pos, a)) continue;
            if (!sample_pixel(ctx, k + 1, ref_pos, b)) continue;
            sum += b - a;
            ++count;
        }
    }
}

}  // namespace

void block_diff_sums(const std::vector<FrameImage>& frames,
                     const std::vector<FrameImage>* masks,
                     const RoiGrid& grid,
                     const std::vector<RigidTransform2D>& regs,
                     int channel_index,
                     Exec exec,
                     Eigen::MatrixXd& out,
                     std::vector<std::uint8_t>& row_valid) {
    const int n_frames = static_cast<int>(frames.size());
    const int n_blocks = grid.blocks();
    const int n_samples = n_frames - 1;

    std::vector<RigidTransform2D> warps(regs.size());
    for (std::size_t i = 0; i < regs.size(); ++i) warps[i] = regs[i].inverse();

    BlockSampleCtx ctx{&frames, masks, &grid, &warps, channel_index};
    out.setZero(n_blocks, n_samples);
    Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic> counts(n_blocks, n_samples);

    if (exec == Exec::Parallel) {
#pragma omp parallel for collapse(2) schedule(static)
        for (int i = 0; i < n_blocks; ++i) {
            for (int k = 0; k < n_samples; ++k) {
                double s;
                long c;
                block_cell(ctx, i, k, s, c);
                out(i, k) = s;
                counts(i, k) = c;
            }
        }
    } else {
        for (int i = 0; i < n_blocks; ++i) {
            for (int k = 0; k < n_samples; ++k) {
                double s;
                long c;
                block_cell(ctx, i, k, s, c);
                out(i, k) = s;
                counts(i, k) = c;
            }
        }
    }

    row_valid.assign(n_blocks, 0);
    for (int i = 0; i < n_blocks; ++i)
        row_valid[i] = counts.row(i).sum() > 0 ? 1 : 0;
}

namespace {

inline double bin_magnitude(const Eigen::VectorXd& x, long bin, long m) {
    // exp(-2*pi*i*bin*j/m) accumulated by rotation, exact enough at window sizes
    const double step = -2.0 * M_PI * static_cast<double>(bin) / static_cast<double>(m);
    const std::complex<double> rot(std::cos(step), std::sin(step));
    std::complex<double> w(1.0, 0.0);
    std::complex<double> acc(0.0, 0.0);
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        acc += x[j] * w;
        w *= rot;
    }
    return std::abs(acc);
}

}  // namespace

Eigen::VectorXd band_dft(const Eigen::VectorXd& x, const std::vector<long>& bins, long m, Exec exec) {
    const long n_bins = static_cast<long>(bins.size());
    Eigen::VectorXd mags(n_bins);
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
        for (long b = 0; b < n_bins; ++b) mags[b] = bin_magnitude(x, bins[b], m);
    } else {
        for (long b = 0; b < n_bins; ++b) mags[b] = bin_magnitude(x, bins[b], m);
    }
    return mags;
}

namespace {

inline void gram_row(const Eigen::MatrixXd& phi, const Eigen::VectorXd& w, const Eigen::VectorXd& x,
                     int i, Eigen::MatrixXd& g, Eigen::VectorXd& rhs) {
    const int alpha = static_cast<int>(phi.rows());
    const int n = static_cast<int>(phi.cols());
    for (int j = i; j < alpha; ++j) {
        double s = 0.0;
        for (int t = 0; t < n; ++t) s += phi(i, t) * w[t] * phi(j, t);
        g(i, j) = s;
        g(j, i) = s;
    }
    double r = 0.0;
    for (int t = 0; t < n; ++t) r += phi(i, t) * w[t] * x[t];
    rhs[i] = r;
}

}  // namespace

void weighted_gram(const Eigen::MatrixXd& phi,
                   const Eigen::VectorXd& w,
                   const Eigen::VectorXd& x,
                   Exec exec,
                   Eigen::MatrixXd& g,
                   Eigen::VectorXd& rhs) {
    const int alpha = static_cast<int>(phi.rows());
    g.resize(alpha, alpha);
    rhs.resize(alpha);
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic)
        for (int i = 0; i < alpha; ++i) gram_row(phi, w, x, i, g, rhs);
    } else {
        for (int i = 0; i < alpha; ++i) gram_row(phi, w, x, i, g, rhs);
    }
}

}  // namespace mombat::kernels
