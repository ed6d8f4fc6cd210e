// Timing harness for the parallel kernels against their serial reference
// paths. Exits nonzero if any pair of results differs.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "mombat/kernels.hpp"
#include "mombat/preprocess.hpp"

using namespace mombat;
using kernels::Exec;

namespace {

double now_ms() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch()).count();
}

template <typename F>
double best_of(int reps, F&& f) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const double t0 = now_ms();
        f();
        best = std::min(best, now_ms() - t0);
    }
    return best;
}

struct Row {
    std::string kernel, size;
    double serial_ms = 0.0, parallel_ms = 0.0;
    bool match = false;
};

void print_table(const std::vector<Row>& rows) {
    std::printf("%-18s %-26s %12s %12s %9s %7s\n", "kernel", "size", "serial_ms", "parallel_ms",
                "speedup", "match");
    for (const Row& r : rows) {
        std::printf("%-18s %-26s %12.3f %12.3f %8.2fx %7s\n", r.kernel.c_str(), r.size.c_str(),
                    r.serial_ms, r.parallel_ms, r.serial_ms / std::max(r.parallel_ms, 1e-9),
                    r.match ? "yes" : "NO");
    }
}

std::uint64_t mix_state = 0x243f6a8885a308d3ull;
double next_unit() {
    mix_state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = mix_state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    z ^= z >> 31;
    return static_cast<double>(z >> 11) * 0x1.0p-53;
}

}  // namespace

int main(int argc, char** argv) {
    bool quick = false;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--quick") == 0) quick = true;
        else {
            std::fprintf(stderr, "usage: kernel_bench [--quick]\n");
            return 2;
        }
    }

    const int frames_n = quick ? 12 : 121;
    const int width = quick ? 60 : 320, height = quick ? 50 : 240;
    const int reps = quick ? 1 : 5;

    std::vector<Row> rows;

    {
        std::vector<FrameImage> frames(static_cast<std::size_t>(frames_n));
        for (int k = 0; k < frames_n; ++k) {
            FrameImage& f = frames[static_cast<std::size_t>(k)];
            f.width = width;
            f.height = height;
            f.channels = 3;
            f.pixels.resize(static_cast<std::size_t>(width * height * 3));
            for (int y = 0; y < height; ++y)
                for (int x = 0; x < width; ++x)
                    for (int c = 0; c < 3; ++c)
                        f.pixels[static_cast<std::size_t>((y * width + x) * 3 + c)] =
                            static_cast<std::uint8_t>((x * 7 + y * 13 + k * 31 + c * 5) & 0xff);
        }
        const RoiGrid grid = build_grid(frames[0], nullptr);
        std::vector<RigidTransform2D> regs(static_cast<std::size_t>(frames_n));
        for (int k = 0; k < frames_n; ++k) {
            regs[static_cast<std::size_t>(k)].theta = 0.01 * std::sin(0.2 * k);
            regs[static_cast<std::size_t>(k)].tx = 2.0 * std::cos(0.15 * k);
            regs[static_cast<std::size_t>(k)].ty = 1.5 * std::sin(0.1 * k);
        }
        Eigen::MatrixXd out_s, out_p;
        std::vector<std::uint8_t> valid_s, valid_p;
        Row row;
        row.kernel = "block_diff_sums";
        row.size = std::to_string(frames_n) + "f " + std::to_string(width) + "x" +
                   std::to_string(height) + " b" + std::to_string(grid.blocks());
        row.serial_ms = best_of(reps, [&] {
            kernels::block_diff_sums(frames, nullptr, grid, regs, 1, Exec::Serial, out_s, valid_s);
        });
        row.parallel_ms = best_of(reps, [&] {
            kernels::block_diff_sums(frames, nullptr, grid, regs, 1, Exec::Parallel, out_p, valid_p);
        });
        row.match = out_s.rows() == out_p.rows() && out_s.cols() == out_p.cols() &&
                    std::memcmp(out_s.data(), out_p.data(),
                                sizeof(double) * static_cast<std::size_t>(out_s.size())) == 0 &&
                    valid_s == valid_p;
        rows.push_back(row);
    }

    {
        const long n = quick ? 512 : 8192;
        const long m = quick ? 1024 : 16384;
        const long nbins = quick ? 64 : 1024;
        Eigen::VectorXd x(n);
        for (long i = 0; i < n; ++i)
            x[i] = std::sin(0.071 * static_cast<double>(i)) + 0.4 * next_unit();
        std::vector<long> bins;
        for (long b = 0; b < nbins; ++b) bins.push_back(b * (m / (2 * nbins)));
        Eigen::VectorXd mag_s, mag_p;
        Row row;
        row.kernel = "band_dft";
        row.size = "n" + std::to_string(n) + " m" + std::to_string(m) + " bins" +
                   std::to_string(nbins);
        row.serial_ms = best_of(reps, [&] { mag_s = kernels::band_dft(x, bins, m, Exec::Serial); });
        row.parallel_ms =
            best_of(reps, [&] { mag_p = kernels::band_dft(x, bins, m, Exec::Parallel); });
        row.match = mag_s.size() == mag_p.size() &&
                    std::memcmp(mag_s.data(), mag_p.data(),
                                sizeof(double) * static_cast<std::size_t>(mag_s.size())) == 0;
        rows.push_back(row);
    }

    {
        const int alpha = quick ? 20 : 120;
        const int n = quick ? 240 : 4096;
        Eigen::MatrixXd phi(alpha, n);
        Eigen::VectorXd w(n), x(n);
        for (int r = 0; r < alpha; ++r)
            for (int i = 0; i < n; ++i) phi(r, i) = next_unit() - 0.5;
        for (int i = 0; i < n; ++i) {
            w[i] = next_unit();
            x[i] = next_unit() - 0.5;
        }
        Eigen::MatrixXd g_s, g_p;
        Eigen::VectorXd rhs_s, rhs_p;
        Row row;
        row.kernel = "weighted_gram";
        row.size = "alpha" + std::to_string(alpha) + " n" + std::to_string(n);
        row.serial_ms =
            best_of(reps, [&] { kernels::weighted_gram(phi, w, x, Exec::Serial, g_s, rhs_s); });
        row.parallel_ms =
            best_of(reps, [&] { kernels::weighted_gram(phi, w, x, Exec::Parallel, g_p, rhs_p); });
        row.match = g_s.size() == g_p.size() &&
                    std::memcmp(g_s.data(), g_p.data(),
                                sizeof(double) * static_cast<std::size_t>(g_s.size())) == 0 &&
                    rhs_s.size() == rhs_p.size() &&
                    std::memcmp(rhs_s.data(), rhs_p.data(),
                                sizeof(double) * static_cast<std::size_t>(rhs_s.size())) == 0;
        rows.push_back(row);
    }

    print_table(rows);
    for (const Row& r : rows)
        if (!r.match) {
            std::fprintf(stderr, "mismatch in %s\n", r.kernel.c_str());
            return 1;
        }
    return 0;
}
