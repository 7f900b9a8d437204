// Benchmark comparing the OpenMP kernels against their serial references:
// pairwise collision sweep, occupancy-grid rasterization, and multi-pair
// planning. Also verifies that both paths produce identical results.

#include <chrono>
#include <cstdio>
#include <random>

#include "labscene/navigation.hpp"

#if defined(_OPENMP)
#include <omp.h>
#endif

using namespace labscene;
using Clock = std::chrono::steady_clock;

namespace {

double seconds(Clock::time_point a, Clock::time_point b) {
    return std::chrono::duration<double>(b - a).count();
}

AssetBase make_base() {
    AssetBase base;
    AssetRecord bench;
    bench.asset_id = "Bench";
    bench.asset_type = AssetType::room_asset;
    bench.category = "furniture";
    bench.bbox = {0.7, 1.6, 0.9};
    bench.provides_surface = true;
    base.insert(bench);
    return base;
}

Layout make_layout(int n, std::mt19937_64& rng) {
    Layout layout;
    layout.room = {60.0, 60.0, 3.0, 0.1};
    std::uniform_real_distribution<double> pos(2.0, 58.0);
    std::uniform_real_distribution<double> yaw(0.0, 360.0);
    for (int i = 0; i < n; ++i) {
        PlacedObject o;
        o.instance_id = "bench_" + std::to_string(i);
        o.asset_id = "Bench";
        o.pose = {pos(rng), pos(rng), 0.0, yaw(rng)};
        layout.objects.push_back(std::move(o));
    }
    return layout;
}

template <typename F>
double best_of(int reps, F&& fn) {
    double best = 1e30;
    for (int i = 0; i < reps; ++i) {
        auto t0 = Clock::now();
        fn();
        auto t1 = Clock::now();
        best = std::min(best, seconds(t0, t1));
    }
    return best;
}

}  // namespace

int main() {
#if defined(_OPENMP)
    std::printf("threads: %d\n", omp_get_max_threads());
#else
    std::printf("threads: 1 (OpenMP disabled)\n");
#endif
    std::mt19937_64 rng(20240901);
    AssetBase base = make_base();

    {
        Layout layout = make_layout(600, rng);
        auto serial = pairwise_collisions_serial(layout, base);
        auto parallel = pairwise_collisions(layout, base);
        bool same = serial.size() == parallel.size();
        for (std::size_t i = 0; same && i < serial.size(); ++i) {
            same = serial[i].id_a == parallel[i].id_a &&
                   serial[i].id_b == parallel[i].id_b &&
                   serial[i].pen.depth == parallel[i].pen.depth;
        }
        double ts = best_of(3, [&] { pairwise_collisions_serial(layout, base); });
        double tp = best_of(3, [&] { pairwise_collisions(layout, base); });
        std::printf("collision sweep   600 objs   serial %.4fs  omp %.4fs  x%.2f  %s\n",
                    ts, tp, ts / tp, same ? "identical" : "MISMATCH");
    }

    {
        Layout layout = make_layout(60, rng);
        OccupancyGrid gs = rasterize_serial(layout, base, 0.05, 0.3);
        OccupancyGrid gp = rasterize(layout, base, 0.05, 0.3);
        bool same = gs.cells == gp.cells;
        double ts = best_of(3, [&] { rasterize_serial(layout, base, 0.05, 0.3); });
        double tp = best_of(3, [&] { rasterize(layout, base, 0.05, 0.3); });
        std::printf("rasterize 1200x1200 cells  serial %.4fs  omp %.4fs  x%.2f  %s\n",
                    ts, tp, ts / tp, same ? "identical" : "MISMATCH");
    }

    {
        Layout layout = make_layout(150, rng);
        OccupancyGrid grid = rasterize(layout, base, 0.05, 0.3);
        std::uniform_real_distribution<double> pos(1.0, 59.0);
        std::vector<GoalPair> pairs;
        for (int i = 0; i < 64; ++i) {
            GoalPair p;
            p.start.x = pos(rng);
            p.start.y = pos(rng);
            p.end.x = pos(rng);
            p.end.y = pos(rng);
            pairs.push_back(p);
        }
        auto so = plan_pairs_serial(grid, pairs);
        auto po = plan_pairs(grid, pairs);
        bool same = so.size() == po.size();
        for (std::size_t i = 0; same && i < so.size(); ++i) {
            same = so[i].status == po[i].status && so[i].length == po[i].length;
        }
        double ts = best_of(3, [&] { plan_pairs_serial(grid, pairs); });
        double tp = best_of(3, [&] { plan_pairs(grid, pairs); });
        std::printf("plan 64 pairs     1200^2    serial %.4fs  omp %.4fs  x%.2f  %s\n",
                    ts, tp, ts / tp, same ? "identical" : "MISMATCH");
    }
    return 0;
}
