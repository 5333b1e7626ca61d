// Command-line front end: dataset ingestion, experiment orchestration,
// geometry/mixture calculators, CSV/SVG/JSON outputs.

#include <atomic>
#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "geodrop/dataset.hpp"
#include "geodrop/dropout_ensemble.hpp"
#include "geodrop/fim.hpp"
#include "geodrop/geometry.hpp"
#include "geodrop/mixtures.hpp"
#include "geodrop/models.hpp"

using namespace geodrop;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// small utilities

// Shortest decimal form that round-trips the double (CSV/report contract).
std::string fmt_g(double v) {
    char buf[40];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, end);
}

std::string fmt_fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return std::string(buf);
}

std::size_t worker_count() {
    if (const char* env = std::getenv("GEODROP_THREADS")) {
        char* end = nullptr;
        unsigned long n = std::strtoul(env, &end, 10);
        if (end == env || *end != '\0' || n == 0)
            throw ConfigError("GEODROP_THREADS must be a positive integer");
        return std::size_t(n);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

void write_text(const fs::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << body;
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? std::nan("") : s / double(v.size());
}

double std_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    double m = mean_of(v), s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / double(v.size() - 1));
}

// ---------------------------------------------------------------------------
// shared experiment configuration

struct Opts {
    std::uint64_t seed = 42;
    std::string mnist_images, mnist_labels;
    std::size_t limit = 5000;       // training examples
    std::size_t test_limit = 1000;  // held-out examples following them
    std::vector<double> rates;      // sweep grid; empty -> 0.0..0.7
    std::size_t trials = 10;
    std::string norm = "frobenius";
    double alpha = 1.0;
    std::string out = ".";
    std::string fim_split = "train";  // inputs for FIM measurement
    std::string config_file;          // consumed before parsing; see main()

    std::vector<std::size_t> widths;  // hidden layer widths
    std::string activation = "relu";
    std::size_t epochs = 10;
    std::size_t batch = 64;
    double lr = 0.4;
    double dropout = 0.0;

    std::size_t synth_classes = 3;
    std::size_t synth_per_class = 200;
    std::size_t synth_dim = 2;
    double synth_sep = 4.0;
};

struct Splits {
    Dataset train;
    Dataset test;
    json meta;
};

Splits load_data(const Opts& o) {
    Splits s;
    if (!o.mnist_images.empty() || !o.mnist_labels.empty()) {
        if (o.mnist_images.empty() || o.mnist_labels.empty())
            throw ConfigError("--mnist-images and --mnist-labels go together");
        if (o.limit == 0) throw ConfigError("--limit must be positive");
        Dataset all = load_mnist(o.mnist_images, o.mnist_labels,
                                 o.limit + o.test_limit);
        if (all.size() <= o.limit)
            throw ConfigError("need more than " + std::to_string(o.limit) +
                              " examples for a train/test split, file has " +
                              std::to_string(all.size()));
        std::size_t n_test = std::min(o.test_limit, all.size() - o.limit);
        s.train = all.slice(0, o.limit);
        s.test = all.slice(o.limit, n_test);
        s.meta = {{"source", "mnist"},
                  {"images", o.mnist_images},
                  {"labels", o.mnist_labels},
                  {"preprocessing", "pixels scaled by 1/255; train = first "
                                    "examples in file order, test = the next"},
                  {"train_examples", s.train.size()},
                  {"test_examples", s.test.size()}};
    } else {
        std::size_t test_per_class = std::max<std::size_t>(o.synth_per_class / 5, 10);
        s.train = synth_blobs(o.synth_classes, o.synth_per_class, o.synth_dim,
                              o.synth_sep, Rng::mix(o.seed, 1001));
        s.test = synth_blobs(o.synth_classes, test_per_class, o.synth_dim,
                             o.synth_sep, Rng::mix(o.seed, 1002));
        s.meta = {{"source", "synthetic"},
                  {"classes", o.synth_classes},
                  {"per_class", o.synth_per_class},
                  {"dim", o.synth_dim},
                  {"separation", o.synth_sep},
                  {"train_examples", s.train.size()},
                  {"test_examples", s.test.size()}};
    }
    return s;
}

MlpModel build_proto(const Splits& s, const Opts& o) {
    std::vector<std::size_t> hidden = o.widths;
    if (hidden.empty())
        hidden = {o.mnist_images.empty() ? std::size_t(16) : std::size_t(100)};
    std::vector<std::size_t> sizes;
    sizes.push_back(s.train.dim());
    for (std::size_t w : hidden) sizes.push_back(w);
    sizes.push_back(s.train.n_classes);
    return make_mlp_zero(sizes, activation_from_name(o.activation));
}

TrainConfig base_train_config(const Opts& o) {
    TrainConfig cfg;
    cfg.learning_rate = o.lr;
    cfg.batch_size = o.batch;
    cfg.epochs = o.epochs;
    return cfg;
}

// ---------------------------------------------------------------------------
// one experiment cell: train with stochastic dropout, then measure

struct TrialRow {
    double rate = 0.0;
    std::size_t trial = 0;
    double fim_norm_value = std::nan("");
    double test_accuracy = std::nan("");
    double train_loss = std::nan("");
    double wall_seconds = 0.0;
    bool diverged = false;
};

TrialRow run_trial(const MlpModel& proto, const Splits& data, const Opts& o,
                   double rate, std::size_t rate_idx, std::size_t trial,
                   FimNorm which) {
    TrialRow row;
    row.rate = rate;
    row.trial = trial;
    auto t0 = std::chrono::steady_clock::now();
    TrainConfig cfg = base_train_config(o);
    cfg.dropout_rate = rate;
    cfg.seed = Rng::mix(o.seed, rate_idx, trial);
    try {
        TrainResult r = train_stochastic(proto, data.train, cfg);
        row.train_loss = r.final_loss;
        row.test_accuracy = evaluate(r.model, data.test).accuracy;
        const Matrix& probe =
            o.fim_split == "test" ? data.test.features : data.train.features;
        FimEstimate est = kfac_fim(r.model, probe);
        row.fim_norm_value = fim_norm(est, which);
    } catch (const NumericalError&) {
        row.diverged = true;  // recorded as NaN, the sweep continues
    }
    row.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return row;
}

// ---------------------------------------------------------------------------
// sweep outputs

std::string rows_to_csv(const std::vector<TrialRow>& rows) {
    std::string csv = "rate,trial,fim_norm,test_accuracy,train_loss,wall_seconds\n";
    for (const TrialRow& r : rows) {
        csv += fmt_g(r.rate);
        csv += ',';
        csv += std::to_string(r.trial);
        csv += ',';
        csv += fmt_g(r.fim_norm_value);
        csv += ',';
        csv += fmt_g(r.test_accuracy);
        csv += ',';
        csv += fmt_g(r.train_loss);
        csv += ',';
        csv += fmt_fixed(r.wall_seconds, 6);
        csv += '\n';
    }
    return csv;
}

struct RateAggregate {
    double rate = 0.0;
    std::size_t finite_trials = 0;
    double fim_mean = 0.0, fim_std = 0.0;
    double acc_mean = 0.0, acc_std = 0.0;
    double loss_mean = 0.0, loss_std = 0.0;
};

std::vector<RateAggregate> aggregate(const std::vector<TrialRow>& rows,
                                     const std::vector<double>& rates,
                                     std::size_t trials) {
    std::vector<RateAggregate> agg;
    for (std::size_t ri = 0; ri < rates.size(); ++ri) {
        RateAggregate a;
        a.rate = rates[ri];
        std::vector<double> fim, acc, loss;
        for (std::size_t t = 0; t < trials; ++t) {
            const TrialRow& r = rows[ri * trials + t];
            if (!std::isfinite(r.fim_norm_value)) continue;
            fim.push_back(r.fim_norm_value);
            acc.push_back(r.test_accuracy);
            loss.push_back(r.train_loss);
        }
        a.finite_trials = fim.size();
        a.fim_mean = mean_of(fim);
        a.fim_std = std_of(fim);
        a.acc_mean = mean_of(acc);
        a.acc_std = std_of(acc);
        a.loss_mean = mean_of(loss);
        a.loss_std = std_of(loss);
        agg.push_back(a);
    }
    return agg;
}

std::string aggregates_to_csv(const std::vector<RateAggregate>& agg) {
    std::string csv =
        "rate,finite_trials,fim_norm_mean,fim_norm_std,test_accuracy_mean,"
        "test_accuracy_std,train_loss_mean,train_loss_std\n";
    for (const RateAggregate& a : agg) {
        csv += fmt_g(a.rate);
        csv += ',';
        csv += std::to_string(a.finite_trials);
        csv += ',';
        csv += fmt_g(a.fim_mean);
        csv += ',';
        csv += fmt_g(a.fim_std);
        csv += ',';
        csv += fmt_g(a.acc_mean);
        csv += ',';
        csv += fmt_g(a.acc_std);
        csv += ',';
        csv += fmt_g(a.loss_mean);
        csv += ',';
        csv += fmt_g(a.loss_std);
        csv += '\n';
    }
    return csv;
}

// Hand-rolled line plot: mean FIM norm vs rate, one-sigma error bars.
std::string sweep_svg(const std::vector<RateAggregate>& agg,
                      const std::string& norm_name) {
    const double W = 640, H = 420, L = 80, R = 24, T = 48, B = 56;
    double x_lo = agg.front().rate, x_hi = agg.back().rate;
    if (x_hi <= x_lo) x_hi = x_lo + 1.0;
    double y_lo = std::numeric_limits<double>::infinity(), y_hi = -y_lo;
    for (const RateAggregate& a : agg) {
        if (!std::isfinite(a.fim_mean)) continue;
        y_lo = std::min(y_lo, a.fim_mean - a.fim_std);
        y_hi = std::max(y_hi, a.fim_mean + a.fim_std);
    }
    if (!std::isfinite(y_lo)) {
        y_lo = 0.0;
        y_hi = 1.0;
    }
    if (y_hi <= y_lo) y_hi = y_lo + 1.0;
    double pad = 0.06 * (y_hi - y_lo);
    y_lo -= pad;
    y_hi += pad;
    auto sx = [&](double r) { return L + (r - x_lo) / (x_hi - x_lo) * (W - L - R); };
    auto sy = [&](double v) {
        return H - B - (v - y_lo) / (y_hi - y_lo) * (H - T - B);
    };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
        << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << " " << H << "\">\n"
        << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n"
        << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"15\">FIM "
        << norm_name << " norm vs dropout rate</text>\n";
    // axes
    svg << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\""
        << H - B << "\" stroke=\"black\"/>\n"
        << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R
        << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
    // x ticks: one per rate
    for (const RateAggregate& a : agg) {
        double x = sx(a.rate);
        svg << "<line x1=\"" << x << "\" y1=\"" << H - B << "\" x2=\"" << x
            << "\" y2=\"" << H - B + 5 << "\" stroke=\"black\"/>\n"
            << "<text x=\"" << x << "\" y=\"" << H - B + 20
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
               "font-size=\"11\">"
            << fmt_fixed(a.rate, 1) << "</text>\n";
    }
    // y ticks
    for (int i = 0; i <= 4; ++i) {
        double v = y_lo + (y_hi - y_lo) * i / 4.0;
        double y = sy(v);
        svg << "<line x1=\"" << L - 5 << "\" y1=\"" << y << "\" x2=\"" << L
            << "\" y2=\"" << y << "\" stroke=\"black\"/>\n"
            << "<text x=\"" << L - 9 << "\" y=\"" << y + 4
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
               "font-size=\"11\">"
            << fmt_fixed(v, 3) << "</text>\n";
    }
    svg << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 14
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"13\">dropout rate</text>\n";
    // error bars + markers + polyline through finite means
    std::ostringstream pts;
    for (const RateAggregate& a : agg) {
        if (!std::isfinite(a.fim_mean)) continue;
        double x = sx(a.rate);
        pts << x << "," << sy(a.fim_mean) << " ";
        svg << "<line x1=\"" << x << "\" y1=\"" << sy(a.fim_mean - a.fim_std)
            << "\" x2=\"" << x << "\" y2=\"" << sy(a.fim_mean + a.fim_std)
            << "\" stroke=\"steelblue\" stroke-width=\"1.5\"/>\n";
    }
    svg << "<polyline points=\"" << pts.str()
        << "\" fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\"/>\n";
    for (const RateAggregate& a : agg) {
        if (!std::isfinite(a.fim_mean)) continue;
        svg << "<circle cx=\"" << sx(a.rate) << "\" cy=\"" << sy(a.fim_mean)
            << "\" r=\"3.2\" fill=\"steelblue\"/>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

// ---------------------------------------------------------------------------
// subcommands

FimNorm norm_of(const Opts& o) { return fim_norm_from_name(o.norm); }

int cmd_train(const Opts& o) {
    Splits data = load_data(o);
    MlpModel proto = build_proto(data, o);
    if (!(o.dropout >= 0.0 && o.dropout < 1.0))
        throw ConfigError("--dropout must be in [0,1)");
    TrialRow row = run_trial(proto, data, o, o.dropout, 0, 0, norm_of(o));
    if (row.diverged) throw NumericalError("training diverged");
    std::printf("rate=%s\n", fmt_g(row.rate).c_str());
    std::printf("train_loss=%s\n", fmt_g(row.train_loss).c_str());
    std::printf("test_accuracy=%s\n", fmt_g(row.test_accuracy).c_str());
    std::printf("norm=%s\n", o.norm.c_str());
    std::printf("fim_norm=%s\n", fmt_g(row.fim_norm_value).c_str());
    std::printf("wall_seconds=%s\n", fmt_fixed(row.wall_seconds, 3).c_str());
    return 0;
}

int cmd_sweep(const Opts& o) {
    std::vector<double> rates = o.rates;
    if (rates.empty())
        rates = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7};
    for (double r : rates)
        if (!(r >= 0.0 && r < 1.0)) throw ConfigError("rates must lie in [0,1)");
    if (o.trials < 1) throw ConfigError("--trials must be >= 1");
    FimNorm which = norm_of(o);

    Splits data = load_data(o);
    MlpModel proto = build_proto(data, o);
    std::size_t threads = worker_count();

    // fan the (rate, trial) grid across workers; each cell derives its own
    // seed, so the outcome is independent of scheduling
    std::vector<TrialRow> rows(rates.size() * o.trials);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (;;) {
            std::size_t j = next.fetch_add(1);
            if (j >= rows.size()) return;
            std::size_t ri = j / o.trials, t = j % o.trials;
            rows[j] = run_trial(proto, data, o, rates[ri], ri, t, which);
        }
    };
    if (threads <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < std::min(threads, rows.size()); ++i)
            pool.emplace_back(work);
        for (std::thread& th : pool) th.join();
    }

    std::size_t diverged = 0;
    for (const TrialRow& r : rows)
        if (r.diverged) {
            ++diverged;
            std::fprintf(stderr, "warning: rate=%s trial=%zu diverged (NaN row)\n",
                         fmt_g(r.rate).c_str(), r.trial);
        }

    std::vector<RateAggregate> agg = aggregate(rows, rates, o.trials);

    fs::path out_dir(o.out);
    fs::create_directories(out_dir);
    fs::path csv_path = out_dir / "sweep.csv";
    fs::path summary_path = out_dir / "sweep_summary.csv";
    fs::path svg_path = out_dir / "sweep.svg";
    fs::path meta_path = out_dir / "meta.json";
    write_text(csv_path, rows_to_csv(rows));
    write_text(summary_path, aggregates_to_csv(agg));
    write_text(svg_path, sweep_svg(agg, o.norm));

    json meta;
    meta["command"] = "sweep";
    meta["seed"] = o.seed;
    meta["dataset"] = data.meta;
    meta["model"] = {{"sizes", proto.sizes}, {"activation", o.activation}};
    meta["train"] = {{"epochs", o.epochs},
                     {"batch_size", o.batch},
                     {"learning_rate", o.lr},
                     {"dropout", "per-batch stochastic unit dropout, inverted "
                                 "1/(1-p) scaling"}};
    meta["sweep"] = {{"rates", rates},
                     {"trials", o.trials},
                     {"norm", o.norm},
                     {"fim_estimator", "kfac"},
                     {"fim_inputs", o.fim_split},
                     {"fim_masks", "off"},
                     {"diverged_rows", diverged}};
    meta["threads"] = threads;
    write_text(meta_path, meta.dump(2) + "\n");

    std::printf("rate  finite  fim_mean      fim_std       acc_mean\n");
    for (const RateAggregate& a : agg)
        std::printf("%-5s %-7zu %-13.6g %-13.6g %.4f\n", fmt_fixed(a.rate, 2).c_str(),
                    a.finite_trials, a.fim_mean, a.fim_std, a.acc_mean);
    std::printf("csv=%s\n", csv_path.string().c_str());
    std::printf("summary=%s\n", summary_path.string().c_str());
    std::printf("svg=%s\n", svg_path.string().c_str());
    std::printf("meta=%s\n", meta_path.string().c_str());
    return 0;
}

int cmd_ensemble(const Opts& o, std::size_t n_masks, double rate,
                 const std::string& scheme, const std::string& weighting) {
    Splits data = load_data(o);
    MlpModel proto = build_proto(data, o);
    EnsembleSpec spec;
    spec.n_masks = n_masks;
    spec.rate = rate;
    spec.alpha = o.alpha;
    if (scheme == "unit")
        spec.scheme = MaskScheme::unit;
    else if (scheme == "coordinate")
        spec.scheme = MaskScheme::coordinate;
    else
        throw ConfigError("unknown mask scheme: " + scheme);
    if (weighting == "uniform")
        spec.weighting = EnsembleWeighting::uniform;
    else if (weighting == "likelihood")
        spec.weighting = EnsembleWeighting::mask_likelihood;
    else
        throw ConfigError("unknown weighting: " + weighting);
    spec.train = base_train_config(o);
    spec.train.seed = o.seed;

    Rng rng(Rng::mix(o.seed, 424242));  // mask sampling stream
    EnsembleResult res = run_ensemble(proto, data.train, data.test, spec, rng);
    std::string report = res.to_json();
    fs::path out_dir(o.out);
    fs::create_directories(out_dir);
    write_text(out_dir / "ensemble.json", report + "\n");
    std::printf("%s\n", report.c_str());
    return 0;
}

int cmd_fim(const Opts& o, const std::string& estimator, std::size_t samples) {
    Splits data = load_data(o);
    MlpModel proto = build_proto(data, o);
    Rng rng(o.seed);
    MlpModel m = make_mlp(proto.sizes, proto.act, rng);
    const Matrix& probe =
        o.fim_split == "test" ? data.test.features : data.train.features;

    FimEstimate est;
    if (estimator == "kfac") {
        est = kfac_fim(m, probe);
    } else if (estimator == "exact") {
        est = exact_fim(m, probe);
    } else if (estimator == "mc") {
        Rng mc_rng(Rng::mix(o.seed, 7));
        est = mc_fim(m, probe, samples, mc_rng);
    } else {
        throw ConfigError("unknown estimator: " + estimator);
    }
    std::printf("estimator=%s\n", estimator.c_str());
    std::printf("params=%zu\n", m.param_count());
    std::printf("fim_dim=%zu\n", fim_dim(est));
    std::printf("n_samples=%zu\n", est.n_samples);
    std::printf("norm=%s\n", o.norm.c_str());
    std::printf("fim_norm=%s\n", fmt_g(fim_norm(est, norm_of(o))).c_str());
    return 0;
}

MetricField metric_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    std::size_t dim = 0;
    if (!(in >> dim) || dim == 0)
        throw FormatError(path + ": expected a positive dimension");
    Matrix g(dim, dim);
    for (std::size_t i = 0; i < dim * dim; ++i)
        if (!(in >> g.data()[i]))
            throw FormatError(path + ": expected " + std::to_string(dim * dim) +
                              " matrix entries");
    if (!is_symmetric(g))
        throw FormatError(path + ": metric matrix must be symmetric");
    return MetricField{dim, [g](const Vec&) { return g; }};
}

void print_tensor3(const char* name, const Tensor3& t) {
    for (std::size_t a = 0; a < t.dim(); ++a)
        for (std::size_t b = 0; b < t.dim(); ++b)
            for (std::size_t c = 0; c < t.dim(); ++c)
                std::printf("%s[%zu][%zu][%zu]=%s\n", name, a, b, c,
                            fmt_g(t(a, b, c)).c_str());
}

void print_tensor4(const char* name, const Tensor4& t) {
    for (std::size_t r = 0; r < t.dim(); ++r)
        for (std::size_t i = 0; i < t.dim(); ++i)
            for (std::size_t j = 0; j < t.dim(); ++j)
                for (std::size_t k = 0; k < t.dim(); ++k)
                    std::printf("%s[%zu][%zu][%zu][%zu]=%s\n", name, r, i, j, k,
                                fmt_g(t(r, i, j, k)).c_str());
}

int cmd_geometry(const std::string& family, std::vector<double> point,
                 const std::string& quantity, const std::string& metric_file,
                 double radius) {
    MetricField g;
    if (family == "euclidean") {
        if (point.empty()) point = {0.0, 0.0};
        g = euclidean_metric(point.size());
    } else if (family == "gaussian") {
        if (point.empty()) point = {0.0, 1.0};
        if (point.size() != 2)
            throw ConfigError("gaussian family expects --point mu,sigma");
        if (!(point[1] > 0.0)) throw DomainError("gaussian: sigma must be > 0");
        g = gaussian_fisher_metric();
    } else if (family == "sphere") {
        if (point.size() != 2)
            throw ConfigError("sphere family expects --point polar,azimuth");
        if (!(point[0] > 0.0 && point[0] < 3.14159265358979312))
            throw DomainError("sphere: polar angle must lie in (0,pi)");
        g = sphere_metric();
    } else if (family == "custom-metric-file") {
        if (metric_file.empty())
            throw ConfigError("custom-metric-file family needs --metric-file");
        g = metric_from_file(metric_file);
        if (point.empty()) point = Vec(g.dim, 0.0);
    } else {
        throw ConfigError("unknown family: " + family);
    }
    if (point.size() != g.dim)
        throw ConfigError("--point has " + std::to_string(point.size()) +
                          " coordinates, metric needs " + std::to_string(g.dim));

    std::printf("family=%s\n", family.c_str());
    std::printf("point=");
    for (std::size_t i = 0; i < point.size(); ++i)
        std::printf("%s%s", i ? "," : "", fmt_g(point[i]).c_str());
    std::printf("\n");

    if (quantity == "christoffel") {
        print_tensor3("Gamma", levi_civita(g, point));
    } else if (quantity == "torsion") {
        print_tensor3("T", torsion(levi_civita_connection(g), point));
    } else if (quantity == "riemann") {
        print_tensor4("R", riemann(levi_civita_connection(g), point));
    } else if (quantity == "scalar") {
        std::printf("scalar=%s\n", fmt_g(scalar_curvature(g, point)).c_str());
    } else if (quantity == "volume-ratio") {
        if (!(radius > 0.0)) throw ConfigError("--radius must be > 0");
        double sc = scalar_curvature(g, point);
        std::printf("scalar=%s\n", fmt_g(sc).c_str());
        std::printf("radius=%s\n", fmt_g(radius).c_str());
        std::printf("volume_ratio=%s\n",
                    fmt_g(volume_ratio(sc, g.dim, radius)).c_str());
    } else {
        throw ConfigError("unknown quantity: " + quantity);
    }
    return 0;
}

Categorical parse_dist(const std::string& text) {
    Vec v;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            v.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw ConfigError("--dist: cannot parse '" + tok + "' as a number");
        }
    }
    Categorical c{v};
    validate(c);
    return c;
}

int cmd_alpha_mix(const std::vector<std::string>& dist_args,
                  const std::string& weights_arg, double alpha) {
    if (dist_args.size() < 2)
        throw ConfigError("--dist must be given at least twice");
    std::vector<Categorical> dists;
    for (const std::string& d : dist_args) dists.push_back(parse_dist(d));
    WeightVector w = WeightVector::uniform(dists.size());
    if (!weights_arg.empty()) {
        w.weights.clear();
        std::stringstream ss(weights_arg);
        std::string tok;
        while (std::getline(ss, tok, ',')) w.weights.push_back(std::stod(tok));
        validate(w);
        if (w.weights.size() != dists.size())
            throw ConfigError("--weights count must match --dist count");
    }

    Categorical mix = alpha_integrate(dists, w, alpha);
    Categorical oracle = argmin_weighted_divergence(dists, w, alpha, 1e-12);
    double gap = 0.0;
    for (std::size_t i = 0; i < mix.probs.size(); ++i)
        gap = std::max(gap, std::fabs(mix.probs[i] - oracle.probs[i]));

    auto print_vec = [](const char* name, const Vec& v) {
        std::printf("%s=", name);
        for (std::size_t i = 0; i < v.size(); ++i)
            std::printf("%s%s", i ? "," : "", fmt_g(v[i]).c_str());
        std::printf("\n");
    };
    std::printf("alpha=%s\n", fmt_g(alpha).c_str());
    print_vec("integrated", mix.probs);
    print_vec("argmin_check", oracle.probs);
    std::printf("gap=%s\n", fmt_g(gap).c_str());
    return 0;
}

int cmd_sff(const std::string& curve, double at) {
    EmbeddedFamily fam;
    if (curve == "line") {
        fam = {1, 3, [](const Vec& t) { return Vec{2.0 * t[0], -t[0], 0.5 * t[0]}; }};
    } else if (curve == "parabola") {
        fam = {1, 2, [](const Vec& t) { return Vec{t[0], t[0] * t[0]}; }};
    } else if (curve == "circle") {
        fam = {1, 2, [](const Vec& t) {
                   return Vec{std::cos(t[0]), std::sin(t[0])};
               }};
    } else {
        throw ConfigError("unknown curve: " + curve);
    }
    SffResult res = second_fundamental_form(fam, {at});
    std::printf("curve=%s\n", curve.c_str());
    std::printf("at=%s\n", fmt_g(at).c_str());
    std::printf("param_dim=%zu\n", res.param_dim);
    std::printf("ambient_dim=%zu\n", res.ambient_dim);
    std::printf("norm=%s\n", fmt_g(res.norm).c_str());
    for (std::size_t i = 0; i < res.param_dim; ++i)
        for (std::size_t j = 0; j < res.param_dim; ++j) {
            const Vec& v = res.second[i * res.param_dim + j];
            std::printf("L[%zu][%zu]=", i, j);
            for (std::size_t a = 0; a < v.size(); ++a)
                std::printf("%s%s", a ? "," : "", fmt_g(v[a]).c_str());
            std::printf("\n");
        }
    return 0;
}

// Expands `--config FILE` into the flags the file spells out, inserted right
// after the subcommand name so explicit flags (parsed take-last) override
// them.  Plain key=value lines; blank lines and #-comments allowed.
void inject_config_args(std::vector<std::string>& args) {
    if (args.empty() || args[0].empty() || args[0][0] == '-') return;
    std::string path;
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size())
            path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0)
            path = args[i].substr(9);
    }
    if (path.empty()) return;
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    auto trim = [](std::string s) {
        std::size_t a = s.find_first_not_of(" \t\r");
        std::size_t b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    std::vector<std::string> injected;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::size_t eq = t.find('=');
        if (eq == std::string::npos || eq == 0)
            throw ConfigError(path + ":" + std::to_string(lineno) +
                              ": expected key=value");
        injected.push_back("--" + trim(t.substr(0, eq)) + "=" +
                           trim(t.substr(eq + 1)));
    }
    args.insert(args.begin() + 1, injected.begin(), injected.end());
}

// attach the flags a subcommand shares with the rest of the tool
void add_common(CLI::App* sub, Opts& o, bool with_model) {
    sub->add_option("--config", o.config_file,
                    "plain key=value config file (flags override)");
    sub->add_option("--seed", o.seed, "base RNG seed");
    sub->add_option("--mnist-images", o.mnist_images, "IDX image file");
    sub->add_option("--mnist-labels", o.mnist_labels, "IDX label file");
    sub->add_option("--limit", o.limit, "training examples taken from the file");
    sub->add_option("--test-limit", o.test_limit,
                    "held-out examples following the training slice");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--synth-classes", o.synth_classes, "synthetic: class count");
    sub->add_option("--synth-per-class", o.synth_per_class,
                    "synthetic: examples per class");
    sub->add_option("--synth-dim", o.synth_dim, "synthetic: feature dimension");
    sub->add_option("--synth-sep", o.synth_sep, "synthetic: cluster separation");
    if (with_model) {
        sub->add_option("--widths", o.widths, "hidden layer widths")
            ->delimiter(',');
        sub->add_option("--activation", o.activation, "hidden activation")
            ->check(CLI::IsMember({"sigmoid", "relu"}));
        sub->add_option("--epochs", o.epochs, "training epochs");
        sub->add_option("--batch", o.batch, "minibatch size");
        sub->add_option("--lr", o.lr, "learning rate");
        sub->add_option("--norm", o.norm, "FIM norm kind")
            ->check(CLI::IsMember({"frobenius", "trace", "spectral"}));
        sub->add_option("--fim-split", o.fim_split,
                        "inputs the FIM is measured on")
            ->check(CLI::IsMember({"train", "test"}));
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"information-geometric dropout toolkit"};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    Opts o;

    CLI::App* train_cmd =
        app.add_subcommand("train", "train one model, report loss/accuracy/FIM norm");
    add_common(train_cmd, o, true);
    train_cmd->add_option("--dropout", o.dropout, "stochastic dropout rate");

    CLI::App* sweep_cmd =
        app.add_subcommand("sweep", "dropout-rate sweep: CSV + SVG + summary");
    add_common(sweep_cmd, o, true);
    sweep_cmd->add_option("--rates", o.rates, "dropout rates to sweep")
        ->delimiter(',');
    sweep_cmd->add_option("--trials", o.trials, "trials per rate");

    std::size_t n_masks = 4;
    double ens_rate = 0.5;
    std::string scheme = "unit", weighting = "uniform";
    CLI::App* ens_cmd = app.add_subcommand(
        "ensemble", "train masked projections, recombine, report JSON");
    add_common(ens_cmd, o, true);
    ens_cmd->add_option("--masks", n_masks, "number of dropout masks");
    ens_cmd->add_option("--dropout", ens_rate, "mask sampling rate");
    ens_cmd->add_option("--alpha", o.alpha, "integration alpha");
    ens_cmd->add_option("--scheme", scheme, "mask scheme")
        ->check(CLI::IsMember({"unit", "coordinate"}));
    ens_cmd->add_option("--weighting", weighting, "member weighting")
        ->check(CLI::IsMember({"uniform", "likelihood"}));

    std::string estimator = "kfac";
    std::size_t samples = 10;
    CLI::App* fim_cmd =
        app.add_subcommand("fim", "estimate the FIM of a fresh model");
    add_common(fim_cmd, o, true);
    fim_cmd->add_option("--estimator", estimator, "FIM estimator")
        ->check(CLI::IsMember({"kfac", "exact", "mc"}));
    fim_cmd->add_option("--samples", samples, "MC label draws per input");

    std::string family = "euclidean", quantity = "scalar", metric_file;
    std::vector<double> point;
    double radius = 0.2;
    CLI::App* geo_cmd =
        app.add_subcommand("geometry", "curvature calculator for metric families");
    geo_cmd->add_option("--config", o.config_file, "plain key=value config file (flags override)");
    geo_cmd->add_option("--family", family, "metric family")
        ->check(CLI::IsMember({"euclidean", "gaussian", "sphere",
                               "custom-metric-file"}));
    geo_cmd->add_option("--point", point, "evaluation point")->delimiter(',');
    geo_cmd->add_option("--quantity", quantity, "what to print")
        ->check(CLI::IsMember(
            {"christoffel", "torsion", "riemann", "scalar", "volume-ratio"}));
    geo_cmd->add_option("--metric-file", metric_file,
                        "constant metric matrix: dim then dim*dim entries");
    geo_cmd->add_option("--radius", radius, "geodesic ball radius");

    std::vector<std::string> dist_args;
    std::string weights_arg;
    CLI::App* mix_cmd = app.add_subcommand(
        "alpha-mix", "alpha-integrate inline distributions, cross-check argmin");
    mix_cmd->add_option("--config", o.config_file, "plain key=value config file (flags override)");
    mix_cmd->add_option("--dist", dist_args,
                        "comma-separated probability vector (repeatable)");
    mix_cmd->add_option("--weights", weights_arg, "comma-separated weights");
    mix_cmd->add_option("--alpha", o.alpha, "integration alpha");

    std::string curve = "parabola";
    double at = 0.3;
    CLI::App* sff_cmd = app.add_subcommand(
        "sff", "second fundamental form of a built-in embedded curve");
    sff_cmd->add_option("--config", o.config_file, "plain key=value config file (flags override)");
    sff_cmd->add_option("--curve", curve, "embedded curve")
        ->check(CLI::IsMember({"line", "parabola", "circle"}));
    sff_cmd->add_option("--at", at, "parameter value");

    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        inject_config_args(args);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    std::reverse(args.begin(), args.end());  // parse(vector) wants them reversed
    try {
        app.parse(std::move(args));
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (train_cmd->parsed()) return cmd_train(o);
        if (sweep_cmd->parsed()) return cmd_sweep(o);
        if (ens_cmd->parsed())
            return cmd_ensemble(o, n_masks, ens_rate, scheme, weighting);
        if (fim_cmd->parsed()) return cmd_fim(o, estimator, samples);
        if (geo_cmd->parsed())
            return cmd_geometry(family, point, quantity, metric_file, radius);
        if (mix_cmd->parsed()) return cmd_alpha_mix(dist_args, weights_arg, o.alpha);
        if (sff_cmd->parsed()) return cmd_sff(curve, at);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const FormatError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    }
    return 0;
}
