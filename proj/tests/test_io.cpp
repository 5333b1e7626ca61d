#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "geodrop/dataset.hpp"
#include "geodrop/errors.hpp"
#include "geodrop/models.hpp"

using namespace geodrop;
namespace fs = std::filesystem;

namespace {

const std::string kImages = std::string(GEODROP_DATA_DIR) + "/mnist-images.idx3-ubyte";
const std::string kLabels = std::string(GEODROP_DATA_DIR) + "/mnist-labels.idx1-ubyte";

fs::path temp_dir() {
    std::string tmpl = (fs::temp_directory_path() / "geodrop-io-XXXXXX").string();
    std::vector<char> buf(tmpl.begin(), tmpl.end());
    buf.push_back('\0');
    char* got = mkdtemp(buf.data());
    REQUIRE(got != nullptr);
    return fs::path(got);
}

void write_file(const fs::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    REQUIRE(out.good());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void put_u32_be(std::string& s, std::uint32_t v) {
    s.push_back(static_cast<char>((v >> 24) & 0xff));
    s.push_back(static_cast<char>((v >> 16) & 0xff));
    s.push_back(static_cast<char>((v >> 8) & 0xff));
    s.push_back(static_cast<char>(v & 0xff));
}

std::string idx_images(const std::vector<std::uint8_t>& pixels, std::uint32_t n,
                       std::uint32_t rows, std::uint32_t cols) {
    std::string s;
    put_u32_be(s, 0x00000803u);
    put_u32_be(s, n);
    put_u32_be(s, rows);
    put_u32_be(s, cols);
    for (std::uint8_t b : pixels) s.push_back(static_cast<char>(b));
    return s;
}

std::string idx_labels(const std::vector<std::uint8_t>& labels) {
    std::string s;
    put_u32_be(s, 0x00000801u);
    put_u32_be(s, static_cast<std::uint32_t>(labels.size()));
    for (std::uint8_t b : labels) s.push_back(static_cast<char>(b));
    return s;
}

template <typename E, typename F>
void expect_throw(F&& fn, const std::string& needle) {
    bool threw = false;
    try {
        fn();
    } catch (const E& e) {
        threw = true;
        INFO("message: " << e.what());
        CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
    CHECK(threw);
}

struct CliResult {
    int exit_code = -1;
    std::string out;
};

CliResult run_shell(const std::string& cmd) {
    CliResult r;
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    char buf[4096];
    while (std::size_t got = std::fread(buf, 1, sizeof(buf), p)) r.out.append(buf, got);
    int st = pclose(p);
    r.exit_code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

// Runs the tool through the shell, capturing stdout.
CliResult run_cli(const std::string& args) {
    return run_shell(std::string(GEODROP_CLI_PATH) + " " + args + " 2>/dev/null");
}

// key=value lines -> map (first '=' splits; later lines win).
std::map<std::string, std::string> kv_lines(const std::string& out) {
    std::map<std::string, std::string> kv;
    std::stringstream ss(out);
    std::string line;
    while (std::getline(ss, line)) {
        auto eq = line.find('=');
        if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> lines;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) lines.push_back(line);
    return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) fields.push_back(tok);
    return fields;
}

// CSV text with the named column removed from every row.
std::string drop_column(const std::string& csv, const std::string& name) {
    std::vector<std::string> rows = lines_of(csv);
    REQUIRE(!rows.empty());
    std::vector<std::string> header = split_csv(rows[0]);
    std::size_t skip = header.size();
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) skip = i;
    REQUIRE(skip < header.size());
    std::string out;
    for (const std::string& row : rows) {
        std::vector<std::string> fields = split_csv(row);
        std::string joined;
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i == skip) continue;
            if (!joined.empty()) joined += ',';
            joined += fields[i];
        }
        out += joined;
        out += '\n';
    }
    return out;
}

const std::string kSynthTrain =
    "--widths 8 --epochs 2 --synth-per-class 40 --synth-classes 3";

}  // namespace

// ---------------------------------------------------------------------------
// IDX loading

TEST_CASE("bundled idx corpus loads with the documented shape") {
    Dataset d = load_mnist(kImages, kLabels);
    CHECK(d.size() == 10000);
    CHECK(d.dim() == 784);
    CHECK(d.n_classes == 10);

    std::vector<std::size_t> counts(10, 0);
    double lo = 1e300, hi = -1e300;
    for (std::size_t i = 0; i < d.size(); ++i) {
        REQUIRE(d.labels[i] >= 0);
        REQUIRE(d.labels[i] < 10);
        ++counts[static_cast<std::size_t>(d.labels[i])];
        for (std::size_t j = 0; j < d.dim(); ++j) {
            lo = std::min(lo, d.features(i, j));
            hi = std::max(hi, d.features(i, j));
        }
    }
    CHECK(lo >= 0.0);
    CHECK(hi <= 1.0);
    CHECK(hi > 0.5);  // actual ink, not a blank file
    for (std::size_t c = 0; c < 10; ++c) CHECK(counts[c] >= 800);
    d.validate();
}

TEST_CASE("limit takes a prefix of the file") {
    Dataset full = load_mnist(kImages, kLabels);
    Dataset head = load_mnist(kImages, kLabels, 1000);
    REQUIRE(head.size() == 1000);
    CHECK(head.dim() == full.dim());
    bool same = true;
    for (std::size_t i = 0; i < head.size() && same; ++i) {
        if (head.labels[i] != full.labels[i]) same = false;
        for (std::size_t j = 0; j < head.dim(); ++j)
            if (head.features(i, j) != full.features(i, j)) same = false;
    }
    CHECK(same);

    CHECK(load_mnist(kImages, kLabels, 20000).size() == 10000);  // clamped
    CHECK(load_mnist(kImages, kLabels, 0).size() == 10000);      // 0 = all
}

TEST_CASE("hand-built idx files round-trip byte values exactly") {
    fs::path dir = temp_dir();
    std::vector<std::uint8_t> pixels = {0,   1,   127, 255,   // image 0
                                        12,  34,  56,  78,    // image 1
                                        200, 100, 50,  25,    // image 2
                                        9,   8,   7,   6,     // image 3
                                        255, 0,   255, 0};    // image 4
    std::vector<std::uint8_t> labels = {0, 3, 9, 1, 2};
    write_file(dir / "img", idx_images(pixels, 5, 2, 2));
    write_file(dir / "lab", idx_labels(labels));

    Dataset d = load_mnist((dir / "img").string(), (dir / "lab").string());
    REQUIRE(d.size() == 5);
    REQUIRE(d.dim() == 4);
    CHECK(d.n_classes == 10);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(d.labels[i] == static_cast<int>(labels[i]));
        for (std::size_t j = 0; j < 4; ++j)
            CHECK(d.features(i, j) == static_cast<double>(pixels[i * 4 + j]) / 255.0);
    }
}

TEST_CASE("loader failure modes are typed and name the offending file") {
    fs::path dir = temp_dir();
    std::vector<std::uint8_t> pixels(5 * 4, 42);
    std::vector<std::uint8_t> labels = {0, 1, 2, 3, 4};
    std::string img = idx_images(pixels, 5, 2, 2);
    std::string lab = idx_labels(labels);
    write_file(dir / "img", img);
    write_file(dir / "lab", lab);
    const std::string img_path = (dir / "img").string();
    const std::string lab_path = (dir / "lab").string();

    SUBCASE("missing file") {
        expect_throw<ConfigError>(
            [&] { load_mnist((dir / "absent").string(), lab_path); }, "absent");
    }
    SUBCASE("bad image magic") {
        std::string bad = img;
        bad[0] = static_cast<char>(0xff);
        write_file(dir / "img_bad", bad);
        expect_throw<FormatError>(
            [&] { load_mnist((dir / "img_bad").string(), lab_path); }, "magic");
    }
    SUBCASE("bad label magic") {
        std::string bad = lab;
        bad[3] = static_cast<char>(0x42);
        write_file(dir / "lab_bad", bad);
        expect_throw<FormatError>(
            [&] { load_mnist(img_path, (dir / "lab_bad").string()); }, "magic");
    }
    SUBCASE("image and label counts disagree") {
        write_file(dir / "lab4", idx_labels({0, 1, 2, 3}));
        expect_throw<FormatError>(
            [&] { load_mnist(img_path, (dir / "lab4").string()); }, "5");
    }
    SUBCASE("truncated payload") {
        write_file(dir / "img_cut", img.substr(0, img.size() - 1));
        expect_throw<FormatError>(
            [&] { load_mnist((dir / "img_cut").string(), lab_path); }, "truncated");
    }
    SUBCASE("truncated header") {
        write_file(dir / "img_hdr", img.substr(0, 8));
        expect_throw<FormatError>(
            [&] { load_mnist((dir / "img_hdr").string(), lab_path); }, "truncated");
    }
    SUBCASE("label byte outside 0..9") {
        std::vector<std::uint8_t> wild = {0, 1, 2, 3, 10};
        write_file(dir / "lab10", idx_labels(wild));
        expect_throw<FormatError>(
            [&] { load_mnist(img_path, (dir / "lab10").string()); }, "outside");
    }
    fs::remove_all(dir);
}

// ---------------------------------------------------------------------------
// synthetic blobs

TEST_CASE("synth_blobs is deterministic and class-major") {
    Dataset a = synth_blobs(3, 50, 2, 4.0, 99);
    Dataset b = synth_blobs(3, 50, 2, 4.0, 99);
    REQUIRE(a.size() == 150);
    CHECK(a.dim() == 2);
    CHECK(a.n_classes == 3);
    bool same = true;
    for (std::size_t i = 0; i < a.size() && same; ++i) {
        if (a.labels[i] != b.labels[i]) same = false;
        for (std::size_t j = 0; j < a.dim(); ++j)
            if (a.features(i, j) != b.features(i, j)) same = false;
    }
    CHECK(same);
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK(a.labels[i] == static_cast<int>(i / 50));

    Dataset c = synth_blobs(3, 50, 2, 4.0, 100);
    bool differs = false;
    for (std::size_t j = 0; j < c.dim() && !differs; ++j)
        if (c.features(0, j) != a.features(0, j)) differs = true;
    CHECK(differs);

    CHECK_THROWS_AS(synth_blobs(1, 50, 2, 4.0, 1), ConfigError);
    CHECK_THROWS_AS(synth_blobs(3, 0, 2, 4.0, 1), ConfigError);
    CHECK_THROWS_AS(synth_blobs(3, 50, 0, 4.0, 1), ConfigError);
}

TEST_CASE("separation moves the clusters to the scaled simplex vertices") {
    // Wide separation: nearest known center classifies perfectly.
    Dataset wide = synth_blobs(2, 100, 2, 10.0, 7);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < wide.size(); ++i) {
        double d0 = 0.0, d1 = 0.0;
        for (std::size_t j = 0; j < 2; ++j) {
            double c0 = (j == 0) ? 10.0 : 0.0;  // class 0 center: 10*e_0
            double c1 = (j == 1) ? 10.0 : 0.0;  // class 1 center: 10*e_1
            d0 += (wide.features(i, j) - c0) * (wide.features(i, j) - c0);
            d1 += (wide.features(i, j) - c1) * (wide.features(i, j) - c1);
        }
        int pred = d0 <= d1 ? 0 : 1;
        if (pred == wide.labels[i]) ++hits;
    }
    CHECK(hits == wide.size());

    // Zero separation: both clusters share the origin; column means vanish.
    Dataset flat = synth_blobs(2, 100, 2, 0.0, 7);
    for (std::size_t j = 0; j < 2; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < flat.size(); ++i) mean += flat.features(i, j);
        mean /= static_cast<double>(flat.size());
        CHECK(std::fabs(mean) < 0.35);  // ~5 sigma of the mean at N=200
    }
}

// ---------------------------------------------------------------------------
// command-line tool, driven as a subprocess

TEST_CASE("cli: train reports the run in key=value form") {
    CliResult r = run_cli("train --seed 5 " + kSynthTrain);
    REQUIRE(r.exit_code == 0);
    auto kv = kv_lines(r.out);
    REQUIRE(kv.count("rate"));
    REQUIRE(kv.count("train_loss"));
    REQUIRE(kv.count("test_accuracy"));
    REQUIRE(kv.count("norm"));
    REQUIRE(kv.count("fim_norm"));
    REQUIRE(kv.count("wall_seconds"));
    CHECK(kv["rate"] == "0");
    CHECK(kv["norm"] == "frobenius");
    CHECK(std::isfinite(std::stod(kv["fim_norm"])));
    CHECK(std::stod(kv["test_accuracy"]) >= 0.0);
    CHECK(std::stod(kv["test_accuracy"]) <= 1.0);
    CHECK(std::stod(kv["wall_seconds"]) >= 0.0);
}

TEST_CASE("cli: sweep writes the documented artifacts") {
    fs::path dir = temp_dir();
    CliResult r = run_cli("sweep --seed 3 --rates 0.0,0.2 --trials 2 " + kSynthTrain +
                          " --out " + dir.string());
    REQUIRE(r.exit_code == 0);

    std::string csv = read_file(dir / "sweep.csv");
    std::vector<std::string> rows = lines_of(csv);
    REQUIRE(rows.size() == 5);
    CHECK(rows[0] == "rate,trial,fim_norm,test_accuracy,train_loss,wall_seconds");
    const char* expect[4][2] = {{"0", "0"}, {"0", "1"}, {"0.2", "0"}, {"0.2", "1"}};
    for (std::size_t i = 0; i < 4; ++i) {
        std::vector<std::string> f = split_csv(rows[i + 1]);
        REQUIRE(f.size() == 6);
        CHECK(f[0] == expect[i][0]);
        CHECK(f[1] == expect[i][1]);
        CHECK(std::isfinite(std::stod(f[2])));
        CHECK(std::stod(f[5]) >= 0.0);
    }

    std::string summary = read_file(dir / "sweep_summary.csv");
    std::vector<std::string> srows = lines_of(summary);
    REQUIRE(srows.size() == 3);
    CHECK(srows[0] ==
          "rate,finite_trials,fim_norm_mean,fim_norm_std,test_accuracy_mean,"
          "test_accuracy_std,train_loss_mean,train_loss_std");
    for (std::size_t i = 1; i < srows.size(); ++i) {
        std::vector<std::string> f = split_csv(srows[i]);
        REQUIRE(f.size() == 8);
        CHECK(f[1] == "2");
    }

    std::string svg = read_file(dir / "sweep.svg");
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);

    nlohmann::json meta = nlohmann::json::parse(read_file(dir / "meta.json"));
    CHECK(meta.at("command") == "sweep");
    CHECK(meta.at("sweep").at("trials") == 2);
    CHECK(meta.at("threads").get<int>() >= 1);
    fs::remove_all(dir);
}

TEST_CASE("cli: train equals the sweep's rate-zero cell string for string") {
    fs::path dir = temp_dir();
    CliResult tr = run_cli("train --seed 11 " + kSynthTrain);
    REQUIRE(tr.exit_code == 0);
    auto kv = kv_lines(tr.out);

    CliResult sw = run_cli("sweep --seed 11 --rates 0.0 --trials 1 " + kSynthTrain +
                           " --out " + dir.string());
    REQUIRE(sw.exit_code == 0);
    std::vector<std::string> rows = lines_of(read_file(dir / "sweep.csv"));
    REQUIRE(rows.size() == 2);
    std::vector<std::string> f = split_csv(rows[1]);
    REQUIRE(f.size() == 6);
    CHECK(f[2] == kv["fim_norm"]);
    CHECK(f[3] == kv["test_accuracy"]);
    CHECK(f[4] == kv["train_loss"]);
    fs::remove_all(dir);
}

TEST_CASE("cli: reruns with one thread are byte-identical outside wall_seconds") {
    fs::path a = temp_dir();
    fs::path b = temp_dir();
    std::string args = "sweep --seed 21 --rates 0.0,0.3 --trials 2 " + kSynthTrain;
    CliResult ra = run_shell("GEODROP_THREADS=1 " + std::string(GEODROP_CLI_PATH) + " " +
                             args + " --out " + a.string() + " >/dev/null 2>&1");
    REQUIRE(ra.exit_code == 0);
    CliResult rb = run_shell("GEODROP_THREADS=1 " + std::string(GEODROP_CLI_PATH) + " " +
                             args + " --out " + b.string() + " >/dev/null 2>&1");
    REQUIRE(rb.exit_code == 0);
    std::string csv_a = drop_column(read_file(a / "sweep.csv"), "wall_seconds");
    std::string csv_b = drop_column(read_file(b / "sweep.csv"), "wall_seconds");
    CHECK(csv_a == csv_b);
    CHECK(read_file(a / "sweep_summary.csv") == read_file(b / "sweep_summary.csv"));
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("cli: exit codes distinguish config, format, and numerical failures") {
    fs::path dir = temp_dir();
    write_file(dir / "img_cut",
               idx_images(std::vector<std::uint8_t>(5 * 4, 1), 5, 2, 2).substr(0, 20));
    write_file(dir / "lab", idx_labels({0, 1, 2, 3, 4}));

    CHECK(run_cli("train --no-such-flag").exit_code == 2);
    CHECK(run_cli("sweep --trials 0 " + kSynthTrain).exit_code == 2);
    CHECK(run_cli("train --dropout 1.0 " + kSynthTrain).exit_code == 2);
    CHECK(run_cli("train --mnist-images " + (dir / "absent").string() +
                  " --mnist-labels " + (dir / "lab").string())
              .exit_code == 2);
    CHECK(run_cli("train --epochs 1 --widths 4 --limit 4 --test-limit 1 "
                  "--mnist-images " +
                  (dir / "img_cut").string() + " --mnist-labels " +
                  (dir / "lab").string())
              .exit_code == 3);
    CHECK(run_cli("geometry --family gaussian --point 1,-0.5 --quantity scalar")
              .exit_code == 4);
    CHECK(run_cli("--help").exit_code == 0);
    CHECK(run_cli("sweep --help").exit_code == 0);
    fs::remove_all(dir);
}

TEST_CASE("cli: config files provide defaults that flags override") {
    fs::path dir = temp_dir();
    write_file(dir / "run.cfg",
               "seed=9\nepochs=2\nlr=0.2\nwidths=8\nsynth-per-class=40\n"
               "synth-classes=3\n");
    CliResult a = run_cli("train --config " + (dir / "run.cfg").string());
    REQUIRE(a.exit_code == 0);
    CliResult b = run_cli(
        "train --seed 9 --epochs 2 --lr 0.2 --widths 8 --synth-per-class 40 "
        "--synth-classes 3");
    REQUIRE(b.exit_code == 0);
    CHECK(kv_lines(a.out)["fim_norm"] == kv_lines(b.out)["fim_norm"]);

    CliResult c = run_cli("train --config " + (dir / "run.cfg").string() + " --seed 12");
    REQUIRE(c.exit_code == 0);
    CHECK(kv_lines(c.out)["fim_norm"] != kv_lines(a.out)["fim_norm"]);
    fs::remove_all(dir);
}

TEST_CASE("cli: geometry families match their closed forms") {
    CliResult sphere =
        run_cli("geometry --family sphere --quantity scalar --point 1.0472,0.5");
    REQUIRE(sphere.exit_code == 0);
    CHECK(std::fabs(std::stod(kv_lines(sphere.out)["scalar"]) - 2.0) < 1e-3);

    CliResult gauss =
        run_cli("geometry --family gaussian --quantity scalar --point 0,1");
    REQUIRE(gauss.exit_code == 0);
    CHECK(std::fabs(std::stod(kv_lines(gauss.out)["scalar"]) + 1.0) < 2e-3);

    CliResult flat =
        run_cli("geometry --family euclidean --quantity scalar --point 0.4,-0.7");
    REQUIRE(flat.exit_code == 0);
    CHECK(std::fabs(std::stod(kv_lines(flat.out)["scalar"])) < 1e-8);

    CliResult vol = run_cli(
        "geometry --family gaussian --quantity volume-ratio --point 0,1 --radius 0.2");
    REQUIRE(vol.exit_code == 0);
    CHECK(std::stod(kv_lines(vol.out)["volume_ratio"]) > 1.0);

    CliResult vols = run_cli(
        "geometry --family sphere --quantity volume-ratio --point 1.2,0.3 --radius 0.2");
    REQUIRE(vols.exit_code == 0);
    CHECK(std::stod(kv_lines(vols.out)["volume_ratio"]) < 1.0);
}

TEST_CASE("cli: custom metric files work and reject malformed input") {
    fs::path dir = temp_dir();
    write_file(dir / "flat.g", "2\n1 0\n0 1\n");
    CliResult ok = run_cli("geometry --family custom-metric-file --metric-file " +
                           (dir / "flat.g").string() +
                           " --quantity scalar --point 0.3,-0.2");
    REQUIRE(ok.exit_code == 0);
    CHECK(std::fabs(std::stod(kv_lines(ok.out)["scalar"])) < 1e-6);

    write_file(dir / "skew.g", "2\n1 0.5\n0 1\n");
    CHECK(run_cli("geometry --family custom-metric-file --metric-file " +
                  (dir / "skew.g").string() + " --quantity scalar")
              .exit_code == 3);

    write_file(dir / "short.g", "2\n1 0\n0\n");
    CHECK(run_cli("geometry --family custom-metric-file --metric-file " +
                  (dir / "short.g").string() + " --quantity scalar")
              .exit_code == 3);

    CHECK(run_cli("geometry --family custom-metric-file --quantity scalar").exit_code ==
          2);
    fs::remove_all(dir);
}

TEST_CASE("cli: alpha-mix endpoints produce the closed-form mixtures") {
    CliResult arith = run_cli(
        "alpha-mix --alpha -1 --dist 0.2,0.8 --dist 0.5,0.5 --weights 0.3,0.7");
    REQUIRE(arith.exit_code == 0);
    auto kv = kv_lines(arith.out);
    std::vector<std::string> probs = split_csv(kv["integrated"]);
    REQUIRE(probs.size() == 2);
    CHECK(std::fabs(std::stod(probs[0]) - 0.41) < 1e-9);
    CHECK(std::fabs(std::stod(probs[1]) - 0.59) < 1e-9);
    CHECK(std::stod(kv["gap"]) < 1e-4);

    CliResult same =
        run_cli("alpha-mix --alpha 1 --dist 0.25,0.75 --dist 0.25,0.75");
    REQUIRE(same.exit_code == 0);
    std::vector<std::string> sp = split_csv(kv_lines(same.out)["integrated"]);
    REQUIRE(sp.size() == 2);
    CHECK(std::fabs(std::stod(sp[0]) - 0.25) < 1e-12);
    CHECK(std::fabs(std::stod(sp[1]) - 0.75) < 1e-12);

    CHECK(run_cli("alpha-mix --alpha 0 --dist 0.5,0.5").exit_code == 2);
    CHECK(run_cli("alpha-mix --dist 0.5,0.5 --dist 0.9,0.2").exit_code == 4);
}

TEST_CASE("cli: sff curves print the expected norms") {
    CliResult line = run_cli("sff --curve line --at 0.4");
    REQUIRE(line.exit_code == 0);
    CHECK(std::stod(kv_lines(line.out)["norm"]) == 0.0);

    CliResult para = run_cli("sff --curve parabola --at 0");
    REQUIRE(para.exit_code == 0);
    CHECK(std::fabs(std::stod(kv_lines(para.out)["norm"]) - 2.0) < 1e-6);

    CliResult circ = run_cli("sff --curve circle --at 0.7");
    REQUIRE(circ.exit_code == 0);
    CHECK(std::fabs(std::stod(kv_lines(circ.out)["norm"]) - 1.0) < 1e-6);
}

TEST_CASE("cli: mnist path trains on the bundled subset") {
    CliResult r = run_cli("train --seed 4 --epochs 1 --widths 16 --limit 400 "
                          "--test-limit 100 --batch 32 --mnist-images " +
                          kImages + " --mnist-labels " + kLabels);
    REQUIRE(r.exit_code == 0);
    auto kv = kv_lines(r.out);
    double acc = std::stod(kv["test_accuracy"]);
    CHECK(acc > 0.3);  // one epoch on 400 digits beats chance comfortably
    CHECK(std::isfinite(std::stod(kv["fim_norm"])));
}
