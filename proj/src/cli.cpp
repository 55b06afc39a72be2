#include "bitprune/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bitprune/binarize.hpp"
#include "bitprune/error.hpp"
#include "bitprune/metrics.hpp"
#include "bitprune/pipeline.hpp"
#include "bitprune/synthetic.hpp"
#include "bitprune/tensorio.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace bitprune::cli {

namespace {

std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("cannot read " + path.string());
    return ss.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError("cannot write " + path.string());
}

void make_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

// --config and --ensemble take either inline JSON or a path to a JSON file.
json parse_json_arg(const std::string& arg, const char* what) {
    std::string text = arg;
    if (text.find('{') == std::string::npos) text = read_text_file(arg);
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string(what) + ": invalid JSON: " + e.what());
    }
}

RunConfig config_from_arg(const std::string& arg) {
    if (arg.empty()) return RunConfig{};
    return RunConfig::from_json(parse_json_arg(arg, "config"));
}

std::vector<std::pair<int, int>> parse_ratios(const std::string& arg) {
    std::vector<std::pair<int, int>> out;
    std::stringstream ss(arg);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos || colon == 0 || colon + 1 == item.size())
            throw ConfigError("ratios: expected N:M, got '" + item + "'");
        int n = 0, m = 0;
        try {
            size_t pos = 0;
            n = std::stoi(item.substr(0, colon), &pos);
            if (pos != colon) throw std::invalid_argument(item);
            pos = 0;
            const std::string ms = item.substr(colon + 1);
            m = std::stoi(ms, &pos);
            if (pos != ms.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError("ratios: expected N:M, got '" + item + "'");
        }
        out.emplace_back(n, m);
    }
    if (out.empty()) throw ConfigError("ratios: empty list");
    return out;
}

struct GenOptions {
    std::string out;
    uint64_t seed = 0;
    std::string dist = "gaussian";
    double df = 3.0;
    int n = 16;
    int m = 16;
    int layers = 2;
    int batches = 2;
    int length = 32;
    int eval_length = 64;
    double col_sigma = 0.0;
};

int run_gen(const GenOptions& opt) {
    SyntheticSpec spec;
    spec.seed = opt.seed;
    spec.dist = distribution_from_name(opt.dist);
    spec.df = opt.df;
    spec.n = opt.n;
    spec.m = opt.m;
    spec.layers = opt.layers;
    spec.batches = opt.batches;
    spec.length = opt.length;
    spec.calib_col_sigma = opt.col_sigma;
    spec.validate();
    const SyntheticData data = gen_synthetic(spec);

    const fs::path out(opt.out);
    make_dir(out / "model");

    ModelManifest mf;
    for (size_t k = 0; k < data.weights.size(); ++k) {
        LayerDesc d;
        d.name = "layer" + std::to_string(k);
        d.weight = "layer" + std::to_string(k) + ".weight.pbt";
        d.n = data.weights[k].rows();
        d.m = data.weights[k].cols();
        mf.layers.push_back(d);
        write_tensor(Tensor::from_matrix(data.weights[k], Dtype::f64),
                     out / "model" / d.weight);
    }
    write_manifest(mf, out / "model" / "manifest.json");

    std::vector<double> flat;
    flat.reserve(static_cast<size_t>(spec.batches) * spec.length * spec.m);
    for (const Matrix& x : data.calib.x)
        flat.insert(flat.end(), x.data(), x.data() + x.size());
    write_tensor(Tensor::from_doubles(flat,
                                      {static_cast<uint64_t>(spec.batches),
                                       static_cast<uint64_t>(spec.length),
                                       static_cast<uint64_t>(spec.m)}),
                 out / "calib.pbt");

    // Held-out inputs for eval, drawn from a shifted seed so they never
    // overlap the calibration stream.
    SyntheticSpec espec = spec;
    espec.seed = spec.seed + 1;
    espec.batches = 1;
    espec.length = opt.eval_length;
    const SyntheticData edata = gen_synthetic(espec);
    write_tensor(Tensor::from_matrix(edata.calib.x[0], Dtype::f64), out / "inputs.pbt");

    std::printf("wrote %d-layer model (%dx%d), %d calibration batches of %d, %d eval inputs to %s\n",
                spec.layers, spec.n, spec.m, spec.batches, spec.length, opt.eval_length,
                out.string().c_str());
    return 0;
}

struct QuantizeOptions {
    std::string model;
    std::string calib;
    std::string config;
    std::string out;
    bool traces = false;
    bool dump_gram = false;
};

int run_quantize(const QuantizeOptions& opt) {
    const Model model = load_model(opt.model);
    const Calib calib = load_calib(opt.calib);
    const RunConfig cfg = config_from_arg(opt.config);

    QuantizeDebug dbg;
    auto [qm, report] = quantize_model(model, calib, cfg, opt.dump_gram ? &dbg : nullptr);

    const fs::path out(opt.out);
    make_dir(out);
    write_text_file(out / "report.json", report.to_json().dump(2) + "\n");
    save_quantized(qm, out / "quantized");

    if (opt.traces) {
        make_dir(out / "traces");
        for (const auto& ql : qm.layers)
            write_text_file(out / "traces" / (ql.name + ".csv"), trace_csv(ql.trace_sum));
    }
    if (opt.dump_gram) {
        make_dir(out / "gram");
        for (size_t k = 0; k < dbg.gram.size(); ++k) {
            const std::string& name = qm.layers[k].name;
            write_tensor(Tensor::from_matrix(dbg.gram[k], Dtype::f64),
                         out / "gram" / (name + ".S.pbt"));
            write_tensor(Tensor::from_matrix(dbg.hessian[k], Dtype::f64),
                         out / "gram" / (name + ".H.pbt"));
        }
    }

    for (const auto& l : report.layers)
        std::printf("%s: n_i=%d l1=%.6g l2=%.6g bd=%.6g\n", l.name.c_str(), l.n_i, l.l1,
                    l.l2, l.bd);
    std::printf("report: %s\n", (out / "report.json").string().c_str());
    return 0;
}

struct SweepOptions {
    std::string model;
    std::string calib;
    std::string config;
    std::string out;
    std::string ratios;
};

int run_sweep(const SweepOptions& opt) {
    const Model model = load_model(opt.model);
    const Calib calib = load_calib(opt.calib);
    const RunConfig cfg = config_from_arg(opt.config);
    const auto ratios = parse_ratios(opt.ratios);

    const auto rows = sweep(model, calib, cfg, ratios);
    const std::string csv = sweep_csv(rows);

    const fs::path out(opt.out);
    make_dir(out);
    write_text_file(out / "sweep.csv", csv);
    std::fputs(csv.c_str(), stdout);
    return 0;
}

struct EnsembleSpec {
    int count = 60;
    int n = 8;
    int m = 16;
    uint64_t seed = 1;
    std::vector<std::string> distributions = {"gaussian", "laplace", "student_t"};
    double df = 3.0;
    bool fixed_norm = false;
};

EnsembleSpec ensemble_from_json(const json& j) {
    EnsembleSpec e;
    if (!j.is_object()) throw ConfigError("ensemble: expected a JSON object");
    for (const auto& [key, val] : j.items()) {
        try {
            if (key == "count")
                e.count = val.get<int>();
            else if (key == "n")
                e.n = val.get<int>();
            else if (key == "m")
                e.m = val.get<int>();
            else if (key == "seed")
                e.seed = val.get<uint64_t>();
            else if (key == "distributions")
                e.distributions = val.get<std::vector<std::string>>();
            else if (key == "df")
                e.df = val.get<double>();
            else if (key == "fixed_norm")
                e.fixed_norm = val.get<bool>();
            else
                throw ConfigError("ensemble: unknown key '" + key + "'");
        } catch (const json::exception& ex) {
            throw ConfigError("ensemble: bad value for '" + key + "': " + ex.what());
        }
    }
    if (e.count < 2) throw ConfigError("ensemble: count must be >= 2");
    if (e.n < 1 || e.m < 2) throw ConfigError("ensemble: need n >= 1, m >= 2");
    if (e.distributions.empty()) throw ConfigError("ensemble: no distributions");
    return e;
}

struct BdScoreOptions {
    std::string ensemble;
    std::string out;
};

int run_bd_score(const BdScoreOptions& opt) {
    EnsembleSpec es;
    if (!opt.ensemble.empty()) es = ensemble_from_json(parse_json_arg(opt.ensemble, "ensemble"));

    std::vector<Matrix> mats;
    mats.reserve(es.count);
    for (int i = 0; i < es.count; ++i) {
        SyntheticSpec ss;
        ss.seed = es.seed + static_cast<uint64_t>(i);
        ss.dist = distribution_from_name(es.distributions[i % es.distributions.size()]);
        ss.df = es.df;
        ss.n = es.n;
        ss.m = es.m;
        ss.length = 1; // calibration unused here
        ss.validate();
        Matrix w = gen_synthetic(ss).weights[0];
        if (es.fixed_norm) {
            double norm2 = 0.0;
            for (size_t t = 0; t < w.size(); ++t) norm2 += w.data()[t] * w.data()[t];
            if (norm2 > 0.0) {
                const double sc = std::sqrt(static_cast<double>(w.size()) / norm2);
                for (size_t t = 0; t < w.size(); ++t) w.data()[t] *= sc;
            }
        }
        mats.push_back(std::move(w));
    }

    const double rho = bd_error_correlation(mats);

    ordered_json j;
    j["count"] = es.count;
    j["spearman"] = rho;
    j["matrices"] = ordered_json::array();
    for (const Matrix& w : mats) {
        const BinaryFit fit = binary(w);
        j["matrices"].push_back(
            {{"bd", bd_score(w)}, {"l1", l1_error(w, fit.reconstruct())}});
    }

    if (!opt.out.empty()) {
        make_dir(opt.out);
        write_text_file(fs::path(opt.out) / "bd.json", j.dump(2) + "\n");
    }
    std::printf("spearman(bd, l1) = %.6f over %d matrices\n", rho, es.count);
    return 0;
}

struct EvalOptions {
    std::string model;
    std::string quantized;
    std::string inputs;
    std::string out;
};

int run_eval(const EvalOptions& opt) {
    const Model model = load_model(opt.model);
    const QuantizedModel qm = load_quantized(opt.quantized);

    const Tensor t = read_tensor(opt.inputs);
    Matrix inputs;
    if (t.dims.size() == 2) {
        inputs = t.to_matrix();
    } else if (t.dims.size() == 3) {
        // Batched inputs evaluate as one tall sample matrix.
        const auto vals = t.to_doubles();
        inputs = Matrix(static_cast<int>(t.dims[0] * t.dims[1]), static_cast<int>(t.dims[2]));
        for (size_t i = 0; i < vals.size(); ++i) inputs.data()[i] = vals[i];
    } else {
        throw DataError("inputs tensor must be 2-D or 3-D");
    }

    const EvalReport rep = eval_model(model, qm, inputs);
    const std::string text = rep.to_json().dump(2) + "\n";
    if (!opt.out.empty()) {
        make_dir(opt.out);
        write_text_file(fs::path(opt.out) / "eval.json", text);
    }
    std::fputs(text.c_str(), stdout);
    return 0;
}

} // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"post-training binarization with N:M pruning"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);

    GenOptions gen;
    CLI::App* cgen = app.add_subcommand("gen", "generate a synthetic model and calibration set");
    cgen->add_option("--out", gen.out, "output directory")->required();
    cgen->add_option("--seed", gen.seed, "rng seed");
    cgen->add_option("--dist", gen.dist, "weight distribution: gaussian|laplace|student_t");
    cgen->add_option("--df", gen.df, "student_t degrees of freedom");
    cgen->add_option("--n", gen.n, "rows per layer");
    cgen->add_option("--m", gen.m, "columns per layer");
    cgen->add_option("--layers", gen.layers, "layer count");
    cgen->add_option("--batches", gen.batches, "calibration batches");
    cgen->add_option("--length", gen.length, "samples per calibration batch");
    cgen->add_option("--eval-length", gen.eval_length, "held-out eval samples");
    cgen->add_option("--col-sigma", gen.col_sigma, "log-normal calibration column spread");

    QuantizeOptions q;
    CLI::App* cq = app.add_subcommand("quantize", "quantize a model against calibration data");
    cq->add_option("--model", q.model, "model manifest JSON")->required();
    cq->add_option("--calib", q.calib, "calibration tensor (PBT)")->required();
    cq->add_option("--config", q.config, "run config: JSON text or path");
    cq->add_option("--out", q.out, "output directory")->required();
    cq->add_flag("--traces", q.traces, "write per-layer stepwise trace CSVs");
    cq->add_flag("--dump-gram", q.dump_gram, "dump per-layer S and H tensors");

    SweepOptions sw;
    CLI::App* csw = app.add_subcommand("sweep", "quantize across a list of N:M ratios");
    csw->add_option("--model", sw.model, "model manifest JSON")->required();
    csw->add_option("--calib", sw.calib, "calibration tensor (PBT)")->required();
    csw->add_option("--config", sw.config, "run config: JSON text or path");
    csw->add_option("--out", sw.out, "output directory")->required();
    csw->add_option("--ratios", sw.ratios, "comma-separated N:M list, e.g. 8:8,7:8")->required();

    BdScoreOptions bd;
    CLI::App* cbd = app.add_subcommand("bd-score", "binarization difficulty vs error correlation");
    cbd->add_option("--ensemble", bd.ensemble, "ensemble spec: JSON text or path");
    cbd->add_option("--out", bd.out, "output directory (writes bd.json)");

    EvalOptions ev;
    CLI::App* cev = app.add_subcommand("eval", "compare quantized against full precision");
    cev->add_option("--model", ev.model, "model manifest JSON")->required();
    cev->add_option("--quantized", ev.quantized, "quantized model directory")->required();
    cev->add_option("--inputs", ev.inputs, "input tensor (PBT)")->required();
    cev->add_option("--out", ev.out, "output directory (writes eval.json)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (cgen->parsed()) return run_gen(gen);
        if (cq->parsed()) return run_quantize(q);
        if (csw->parsed()) return run_sweep(sw);
        if (cbd->parsed()) return run_bd_score(bd);
        if (cev->parsed()) return run_eval(ev);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const NumericError& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return 3;
    } catch (const IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return 2;
    } catch (const DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 1;
}

} // namespace bitprune::cli
