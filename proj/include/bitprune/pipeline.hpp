#ifndef BITPRUNE_PIPELINE_HPP
#define BITPRUNE_PIPELINE_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "bitprune/binarize.hpp"
#include "bitprune/gram.hpp"
#include "bitprune/maskgen.hpp"
#include "bitprune/matrix.hpp"
#include "bitprune/metrics.hpp"
#include "bitprune/spbo.hpp"
#include "bitprune/synthetic.hpp"
#include "bitprune/tensorio.hpp"

#include <json.hpp>

namespace bitprune {

enum class PruneMetric { hessian, magnitude, wanda, random };
enum class PruneType { semi, structured, unstructured };

PruneMetric prune_metric_from_name(const std::string& s);
std::string prune_metric_name(PruneMetric m);
PruneType prune_type_from_name(const std::string& s);
std::string prune_type_name(PruneType t);

struct RunConfig {
    int n_target = 6;
    int m_group = 8;
    int rounds = 3;          // refinement rounds per phase
    double r_salient = 0.1;
    int b_size = 8;          // compensation block width, multiple of m_group
    int split_points = 2;    // magnitude segments - 1 for non-salient entries
    double lambda = 0.01;    // Hessian damping
    double eps = 1e-12;
    uint64_t seed = 0;       // only the random prune metric draws from it
    bool stepwise = true;    // false: one-shot prune, then binarize
    bool cfs = true;         // cross-layer N_i allocation
    bool exempt_salient = false;   // keep salient columns out of the prune pool
    bool resign_after_refine = false; // recompute signs after each refine phase
    PruneMetric prune_metric = PruneMetric::hessian;
    PruneType prune_type = PruneType::semi;

    void validate() const;
    static RunConfig from_json(const nlohmann::json& j);
    nlohmann::ordered_json to_json() const;
};

struct Model {
    std::vector<std::string> names;
    std::vector<Matrix> weights; // layer k maps weights[k].cols() -> rows()
};

Model load_model(const std::filesystem::path& manifest_path);
Calib load_calib(const std::filesystem::path& tensor_path);

// Compressed form of one layer. Scales/segments carry everything needed to
// rebuild What exactly; reconstruct() returns it densely.
struct QuantizedLayer {
    std::string name;
    int n = 0, m = 0;
    int n_i = 0, m_group = 0;
    int b_size = 0;
    int n_segs = 0;               // split segments for non-salient entries
    Mask keep;                    // final support
    std::vector<uint8_t> salient; // per column
    std::vector<int8_t> seg;      // row-major: -1 salient, else segment id
    Matrix b1, b2;                // signs; b2 only on salient columns
    // Per block per row: [mu, a1, a2, seg alphas...], width 3 + n_segs.
    std::vector<Matrix> scales;
    Trace trace_sum;              // per-step block sums (diagnostic)

    Matrix reconstruct() const;
};

struct QuantizedModel {
    std::vector<QuantizedLayer> layers;
};

struct LayerReport {
    std::string name;
    double l1 = 0.0;
    double l2 = 0.0;
    double bd = 0.0;
    int n_i = 0;
};

struct RunReport {
    std::vector<LayerReport> layers;
    std::vector<double> lr;  // empty when CFS is off
    std::vector<int> ranks;
    BitBudget avg_bits;
    RunConfig config;

    nlohmann::ordered_json to_json() const;
};

// Optional tap for the per-layer Gram and damped Hessian, for debug dumps.
struct QuantizeDebug {
    std::vector<Matrix> gram;
    std::vector<Matrix> hessian;
};

// Quantize every layer in sequence: Gram/Hessian from activations already
// propagated through the quantized prefix, saliency split, N:M masks, block
// binarization with error compensation.
std::pair<QuantizedModel, RunReport> quantize_model(const Model& model,
                                                    const Calib& calib,
                                                    const RunConfig& cfg,
                                                    QuantizeDebug* debug = nullptr);

struct SweepRow {
    int n = 0, m = 0;
    double l2_total = 0.0;
    double l1_total = 0.0;
    double bd_total = 0.0; // surviving-weight difficulty, summed over layers
};

// Re-runs the pipeline per ratio with uniform allocation (CFS off: endpoint
// ratios sit outside the interpolation's valid range).
std::vector<SweepRow> sweep(const Model& model, const Calib& calib, RunConfig cfg,
                            const std::vector<std::pair<int, int>>& ratios);

std::string sweep_csv(const std::vector<SweepRow>& rows);
std::string trace_csv(const Trace& t);

struct EvalReport {
    std::vector<double> layer_mse; // own-activation outputs, fp vs quantized
    double end_to_end_mse = 0.0;

    nlohmann::ordered_json to_json() const;
};

// Forward inputs through both models (tanh between layers, linear output) and
// compare activations. Inputs: samples x features of the first layer.
EvalReport eval_model(const Model& fp, const QuantizedModel& q, const Matrix& inputs);

Matrix forward_layer(const Matrix& w, const Matrix& x); // x (s,m) -> (s,n)

void save_quantized(const QuantizedModel& qm, const std::filesystem::path& dir);
QuantizedModel load_quantized(const std::filesystem::path& dir);

} // namespace bitprune

#endif
