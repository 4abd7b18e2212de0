#include "regenhd/faults.hpp"

#include <cmath>
#include <fstream>

#include "regenhd/errors.hpp"
#include "regenhd/fmt.hpp"
#include "regenhd/rng.hpp"

namespace regenhd {

QuantizedModel inject(const QuantizedModel& qm, const FaultSpec& spec) {
    if (!(spec.flip_probability >= 0.0 && spec.flip_probability <= 1.0))
        throw config_error("flip probability must be in [0, 1]");

    QuantizedModel out = qm;
    if (spec.flip_probability == 0.0) return out;

    const int b = qm.bitwidth;
    const int cpw = 64 / b;
    for (std::size_t r = 0; r < out.rows.size(); ++r) {
        auto& row = out.rows[r];
        std::vector<std::uint64_t> words = pack_codes(row.codes, b);
        Rng rng = Rng::substream(spec.seed, static_cast<std::uint64_t>(r));
        for (std::size_t j = 0; j < row.codes.size(); ++j) {
            const std::size_t w = j / static_cast<std::size_t>(cpw);
            const int base_bit = static_cast<int>(j % static_cast<std::size_t>(cpw)) * b;
            for (int k = 0; k < b; ++k) {
                if (rng.next_double() < spec.flip_probability)
                    words[w] ^= 1ULL << (base_bit + k);
            }
        }
        row.codes = unpack_codes(words, b, row.codes.size());
    }
    return out;
}

std::vector<RobustnessPoint> robustness_curve(const ClassModel& model,
                                              const Eigen::MatrixXd& H_test,
                                              const std::vector<int>& labels,
                                              const std::vector<int>& bitwidths,
                                              const std::vector<double>& p_grid, int trials,
                                              std::uint64_t seed) {
    if (trials < 1) throw config_error("need at least one trial");
    if (H_test.cols() == 0) throw data_error("robustness curve needs a non-empty test set");
    if (bitwidths.empty() || p_grid.empty())
        throw config_error("need at least one bitwidth and one flip probability");
    for (int b : bitwidths)
        if (!valid_bitwidth(b)) throw config_error("bitwidth must be one of 1,2,4,8,16,32");
    for (double p : p_grid)
        if (!(p >= 0.0 && p <= 1.0)) throw config_error("flip probability must be in [0, 1]");

    std::vector<RobustnessPoint> points;
    points.reserve(bitwidths.size() * p_grid.size());

    for (std::size_t ib = 0; ib < bitwidths.size(); ++ib) {
        const int b = bitwidths[ib];
        QuantizedModel qm = quantize_model(model, b);
        std::vector<QuantizedVector> queries = quantize_queries(H_test, b);

        for (std::size_t ip = 0; ip < p_grid.size(); ++ip) {
            std::vector<double> accs(static_cast<std::size_t>(trials));
            for (int t = 0; t < trials; ++t) {
                FaultSpec spec;
                spec.flip_probability = p_grid[ip];
                spec.seed = derive_stream_seed(
                    seed, (static_cast<std::uint64_t>(ib) * p_grid.size() + ip) *
                                  static_cast<std::uint64_t>(trials) +
                              static_cast<std::uint64_t>(t));
                QuantizedModel faulty = inject(qm, spec);
                accs[static_cast<std::size_t>(t)] = accuracy_q(faulty, queries, labels);
            }

            double lo = accs[0], hi = accs[0], sum = 0.0;
            for (double a : accs) {
                lo = std::min(lo, a);
                hi = std::max(hi, a);
                sum += a;
            }
            RobustnessPoint pt;
            pt.bitwidth = b;
            pt.flip_probability = p_grid[ip];
            pt.trials = trials;
            if (lo == hi) {
                // all trials agree (always true at p=0); keep the value exact
                pt.mean_accuracy = lo;
                pt.std_accuracy = 0.0;
            } else {
                pt.mean_accuracy = sum / static_cast<double>(trials);
                double sq = 0.0;
                for (double a : accs) sq += (a - pt.mean_accuracy) * (a - pt.mean_accuracy);
                pt.std_accuracy = std::sqrt(sq / static_cast<double>(trials));
            }
            points.push_back(pt);
        }
    }
    return points;
}

void write_curve_csv(const std::string& path, const std::vector<RobustnessPoint>& points) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot open for writing: " + path);
    out << "bitwidth,p,trial_count,mean_acc,std_acc\n";
    for (const auto& pt : points) {
        out << pt.bitwidth << "," << fmt_double(pt.flip_probability) << "," << pt.trials << ","
            << fmt_double(pt.mean_accuracy) << "," << fmt_double(pt.std_accuracy) << "\n";
    }
    if (!out) throw data_error("write failed: " + path);
}

}  // namespace regenhd
