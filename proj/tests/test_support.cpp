// Suites for the pieces around the training loop: the optimizer, IDX file
// handling, the synthetic corpora, run configuration, metrics files, and
// checkpoints.

#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "frugal/checkpoint.hpp"
#include "frugal/config.hpp"
#include "frugal/data.hpp"
#include "frugal/metrics.hpp"
#include "frugal/network.hpp"
#include "frugal/optimizer.hpp"
#include "frugal/rng.hpp"
#include "frugal/synth.hpp"
#include "frugal/tensor.hpp"

using namespace frugal;

namespace {

std::filesystem::path work_dir() {
    static const std::filesystem::path dir = [] {
        auto p = std::filesystem::temp_directory_path() / "frugal_support_tests";
        std::filesystem::create_directories(p);
        return p;
    }();
    return dir;
}

std::string work_path(const std::string& name) { return (work_dir() / name).string(); }

void write_raw(const std::string& path, const std::vector<uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    REQUIRE(out.good());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    REQUIRE(out.good());
}

std::vector<uint8_t> read_raw(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::vector<uint8_t>(std::istreambuf_iterator<char>(in),
                                std::istreambuf_iterator<char>());
}

void push_u32_be(std::vector<uint8_t>& v, uint32_t x) {
    v.push_back(static_cast<uint8_t>(x >> 24));
    v.push_back(static_cast<uint8_t>(x >> 16));
    v.push_back(static_cast<uint8_t>(x >> 8));
    v.push_back(static_cast<uint8_t>(x));
}

}  // namespace

TEST_SUITE("optimizer") {

TEST_CASE("one plain step moves the weight by lr times the gradient") {
    Tensor w({1});
    Tensor g({1});
    Tensor v({1});
    w(0) = 1.0;
    g(0) = 0.5;
    SgdConfig cfg;
    cfg.lr = 0.1;
    cfg.momentum = 0.0;
    cfg.weight_decay = 0.0;

    sgd_step(w, g, v, cfg);
    CHECK(w(0) == doctest::Approx(0.95).epsilon(1e-15));
    CHECK(v(0) == doctest::Approx(0.5).epsilon(1e-15));

    g(0) = 0.0;
    const double before = w(0);
    Tensor v2({1});
    sgd_step(w, g, v2, cfg);
    CHECK(w(0) == before);
}

TEST_CASE("momentum folds the previous velocity into the next step") {
    Tensor w({1});
    Tensor g({1});
    Tensor v({1});
    w(0) = 1.0;
    g(0) = 0.5;
    SgdConfig cfg;
    cfg.lr = 0.1;
    cfg.momentum = 0.5;

    // v1 = 0.5, w1 = 1 - 0.1 * 0.5 = 0.95
    sgd_step(w, g, v, cfg);
    CHECK(w(0) == doctest::Approx(0.95).epsilon(1e-15));
    // v2 = 0.5 * 0.5 + 0.5 = 0.75, w2 = 0.95 - 0.075 = 0.875
    sgd_step(w, g, v, cfg);
    CHECK(v(0) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(w(0) == doctest::Approx(0.875).epsilon(1e-15));
}

TEST_CASE("weight decay acts like an extra gradient of lambda times w") {
    Tensor w({1});
    Tensor g({1});
    Tensor v({1});
    w(0) = 2.0;
    g(0) = 0.0;
    SgdConfig cfg;
    cfg.lr = 1.0;
    cfg.momentum = 0.0;
    cfg.weight_decay = 0.1;

    sgd_step(w, g, v, cfg);
    CHECK(v(0) == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(w(0) == doctest::Approx(1.8).epsilon(1e-15));
}

TEST_CASE("SgdMomentum tracks one velocity slot per parameter") {
    Tensor wa({2});
    Tensor wb({1});
    wa(0) = 1.0;
    wa(1) = -2.0;
    wb(0) = 3.0;
    Tensor ga({2});
    Tensor gb({1});
    ga(0) = 0.5;
    ga(1) = 0.25;
    gb(0) = -1.0;

    SgdConfig cfg;
    cfg.lr = 0.1;
    cfg.momentum = 0.5;
    std::vector<Tensor*> params{&wa, &wb};
    std::vector<Tensor*> grads{&ga, &gb};
    SgdMomentum opt(params, cfg);

    // hand recurrence per element: v <- 0.5 v + g, w <- w - 0.1 v
    double va0 = 0.0, va1 = 0.0, vb0 = 0.0;
    double ea0 = 1.0, ea1 = -2.0, eb0 = 3.0;
    for (int step = 0; step < 3; ++step) {
        opt.step(params, grads);
        va0 = 0.5 * va0 + 0.5;
        va1 = 0.5 * va1 + 0.25;
        vb0 = 0.5 * vb0 - 1.0;
        ea0 -= 0.1 * va0;
        ea1 -= 0.1 * va1;
        eb0 -= 0.1 * vb0;
    }
    CHECK(wa(0) == doctest::Approx(ea0).epsilon(1e-14));
    CHECK(wa(1) == doctest::Approx(ea1).epsilon(1e-14));
    CHECK(wb(0) == doctest::Approx(eb0).epsilon(1e-14));

    CHECK(opt.lr() == 0.1);
    opt.set_lr(0.01);
    CHECK(opt.lr() == 0.01);
    const double before = wa(0);
    opt.step(params, grads);
    va0 = 0.5 * va0 + 0.5;
    CHECK(wa(0) == doctest::Approx(before - 0.01 * va0).epsilon(1e-14));
}

}  // TEST_SUITE optimizer

TEST_SUITE("data") {

TEST_CASE("a hand-assembled idx file loads back verbatim") {
    std::vector<uint8_t> file;
    push_u32_be(file, 0x00000801u);  // unsigned bytes, rank 1
    push_u32_be(file, 2u);
    file.push_back(7);
    file.push_back(2);
    const std::string path = work_path("hand.idx");
    write_raw(path, file);

    const IdxData got = load_idx(path);
    REQUIRE(got.dims == std::vector<int>{2});
    REQUIRE(got.bytes == std::vector<uint8_t>{7, 2});
}

TEST_CASE("malformed headers are rejected with the specific error") {
    SUBCASE("wrong magic") {
        std::vector<uint8_t> file;
        push_u32_be(file, 0x12345678u);
        const std::string path = work_path("badmagic.idx");
        write_raw(path, file);
        CHECK_THROWS_AS(load_idx(path), BadMagic);
    }
    SUBCASE("rank outside 1..4") {
        std::vector<uint8_t> file;
        push_u32_be(file, 0x00000805u);
        const std::string path = work_path("badrank.idx");
        write_raw(path, file);
        CHECK_THROWS_AS(load_idx(path), BadMagic);
    }
    SUBCASE("payload shorter than the header promises") {
        std::vector<uint8_t> file;
        push_u32_be(file, 0x00000801u);
        push_u32_be(file, 4u);
        file.push_back(1);
        file.push_back(2);
        const std::string path = work_path("short.idx");
        write_raw(path, file);
        CHECK_THROWS_AS(load_idx(path), Truncated);
    }
    SUBCASE("zero dimension") {
        std::vector<uint8_t> file;
        push_u32_be(file, 0x00000802u);
        push_u32_be(file, 0u);
        push_u32_be(file, 3u);
        const std::string path = work_path("zerodim.idx");
        write_raw(path, file);
        CHECK_THROWS_AS(load_idx(path), DimensionOverflow);
    }
    SUBCASE("element count overflow") {
        std::vector<uint8_t> file;
        push_u32_be(file, 0x00000802u);
        push_u32_be(file, 65536u);
        push_u32_be(file, 65536u);
        const std::string path = work_path("overflow.idx");
        write_raw(path, file);
        CHECK_THROWS_AS(load_idx(path), DimensionOverflow);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(load_idx(work_path("no-such-file.idx")), DataError);
    }
}

TEST_CASE("save and load round trip, plain and gzip") {
    IdxData data;
    data.dims = {2, 3};
    data.bytes = {0, 1, 2, 3, 4, 5};

    const std::string plain = work_path("roundtrip.idx");
    save_idx(plain, data);
    const IdxData back = load_idx(plain);
    CHECK(back.dims == data.dims);
    CHECK(back.bytes == data.bytes);

    // the plain writer emits the header uncompressed
    const std::vector<uint8_t> raw = read_raw(plain);
    REQUIRE(raw.size() == 4 + 8 + 6);
    CHECK(raw[0] == 0x00);
    CHECK(raw[1] == 0x00);
    CHECK(raw[2] == 0x08);
    CHECK(raw[3] == 0x02);

    const std::string gz = work_path("roundtrip.idx.gz");
    save_idx(gz, data);
    const std::vector<uint8_t> gzraw = read_raw(gz);
    CHECK(gzraw[0] == 0x1f);  // gzip signature
    CHECK(gzraw[1] == 0x8b);
    const IdxData back_gz = load_idx(gz);
    CHECK(back_gz.dims == data.dims);
    CHECK(back_gz.bytes == data.bytes);
}

TEST_CASE("save_idx validates its input") {
    IdxData data;
    data.dims = {};
    CHECK_THROWS_AS(save_idx(work_path("x.idx"), data), std::invalid_argument);
    data.dims = {2, -1};
    data.bytes = {0, 0};
    CHECK_THROWS_AS(save_idx(work_path("x.idx"), data), std::invalid_argument);
    data.dims = {3};
    CHECK_THROWS_AS(save_idx(work_path("x.idx"), data), std::invalid_argument);
}

TEST_CASE("pixel normalization endpoints") {
    CHECK(normalize_pixel(0) == doctest::Approx(-0.4242).epsilon(1e-4));
    CHECK(normalize_pixel(255) == doctest::Approx(2.8215).epsilon(1e-4));
    CHECK(normalize_pixel(0) < normalize_pixel(128));
    CHECK(normalize_pixel(128) < normalize_pixel(255));
}

TEST_CASE("make_dataset shapes, values, and validation") {
    IdxData images;
    images.dims = {2, 2, 2};
    images.bytes = {0, 255, 10, 20, 30, 40, 50, 60};
    IdxData labels;
    labels.dims = {2};
    labels.bytes = {0, 9};

    const Dataset ds = make_dataset(images, labels, 10);
    REQUIRE(ds.images.shape() == std::vector<int>{2, 1, 2, 2});
    CHECK(ds.size() == 2);
    CHECK(ds.num_classes == 10);
    CHECK(ds.labels == std::vector<int>{0, 9});
    CHECK(ds.images(0, 0, 0, 0) == doctest::Approx(normalize_pixel(0)).epsilon(1e-15));
    CHECK(ds.images(0, 0, 0, 1) == doctest::Approx(normalize_pixel(255)).epsilon(1e-15));
    CHECK(ds.images(1, 0, 1, 1) == doctest::Approx(normalize_pixel(60)).epsilon(1e-15));

    SUBCASE("label outside class range") {
        IdxData bad = labels;
        bad.bytes = {0, 10};
        CHECK_THROWS_AS(make_dataset(images, bad, 10), std::invalid_argument);
    }
    SUBCASE("image rank must be 3") {
        IdxData flat;
        flat.dims = {8};
        flat.bytes = images.bytes;
        CHECK_THROWS_AS(make_dataset(flat, labels, 10), std::invalid_argument);
    }
    SUBCASE("count mismatch") {
        IdxData three;
        three.dims = {3};
        three.bytes = {0, 1, 2};
        CHECK_THROWS_AS(make_dataset(images, three, 10), std::invalid_argument);
    }
}

TEST_CASE("stratified_subset balances classes deterministically") {
    // 30 instances, 3 classes, 10 each, labels interleaved
    IdxData images;
    images.dims = {30, 2, 2};
    images.bytes.resize(30 * 4);
    for (size_t i = 0; i < images.bytes.size(); ++i) {
        images.bytes[i] = static_cast<uint8_t>(i % 251);
    }
    IdxData labels;
    labels.dims = {30};
    for (int i = 0; i < 30; ++i) labels.bytes.push_back(static_cast<uint8_t>(i % 3));
    const Dataset full = make_dataset(images, labels, 3);

    const Dataset sub = stratified_subset(full, 2, 77);
    REQUIRE(sub.size() == 6);
    std::map<int, int> counts;
    for (int y : sub.labels) ++counts[y];
    CHECK(counts[0] == 2);
    CHECK(counts[1] == 2);
    CHECK(counts[2] == 2);

    const Dataset again = stratified_subset(full, 2, 77);
    REQUIRE(again.size() == sub.size());
    CHECK(again.labels == sub.labels);
    bool same_pixels = true;
    for (size_t i = 0; i < sub.images.numel(); ++i) {
        if (sub.images[i] != again.images[i]) same_pixels = false;
    }
    CHECK(same_pixels);

    CHECK_THROWS_AS(stratified_subset(full, 11, 1), std::invalid_argument);
    CHECK_THROWS_AS(stratified_subset(full, 0, 1), std::invalid_argument);
}

TEST_CASE("take_batch copies the requested rows in order") {
    IdxData images;
    images.dims = {4, 2, 2};
    for (int i = 0; i < 16; ++i) images.bytes.push_back(static_cast<uint8_t>(i * 7));
    IdxData labels;
    labels.dims = {4};
    labels.bytes = {3, 1, 0, 2};
    const Dataset ds = make_dataset(images, labels, 4);

    const std::vector<int> order{2, 0, 3, 1};
    const Batch b = take_batch(ds, order, 1, 2);
    REQUIRE(b.x.shape() == std::vector<int>{2, 1, 2, 2});
    CHECK(b.y == std::vector<int>{3, 2});
    for (int r = 0; r < 2; ++r) {
        const int src = order[static_cast<size_t>(1 + r)];
        for (int y = 0; y < 2; ++y) {
            for (int x = 0; x < 2; ++x) {
                CHECK(b.x(r, 0, y, x) == ds.images(src, 0, y, x));
            }
        }
    }

    CHECK_THROWS_AS(take_batch(ds, order, 3, 2), std::invalid_argument);
}

}  // TEST_SUITE data

TEST_SUITE("synth") {

TEST_CASE("digit rendering is byte-identical for one config") {
    DigitSetConfig cfg;
    cfg.per_class = 2;
    cfg.seed = 9;
    const DigitSet a = render_digit_set(cfg);
    const DigitSet b = render_digit_set(cfg);
    REQUIRE(a.images.dims == std::vector<int>{20, 28, 28});
    REQUIRE(a.labels.dims == std::vector<int>{20});
    CHECK(a.images.bytes == b.images.bytes);
    CHECK(a.labels.bytes == b.labels.bytes);

    std::map<int, int> counts;
    for (uint8_t y : a.labels.bytes) ++counts[y];
    for (int c = 0; c < 10; ++c) CHECK(counts[c] == 2);

    DigitSetConfig other = cfg;
    other.seed = 10;
    const DigitSet c = render_digit_set(other);
    CHECK(c.images.bytes != a.images.bytes);
}

TEST_CASE("render config validation") {
    DigitSetConfig cfg;
    cfg.per_class = 0;
    CHECK_THROWS_AS(render_digit_set(cfg), std::invalid_argument);
    cfg.per_class = 1;
    cfg.h = 8;
    CHECK_THROWS_AS(render_digit_set(cfg), std::invalid_argument);
}

TEST_CASE("stream batches are reproducible for one seed") {
    StreamConfig cfg;
    cfg.batch = 16;
    cfg.seed = 123;
    SyntheticStream sa(cfg);
    SyntheticStream sb(cfg);
    for (int t = 0; t < 3; ++t) {
        const StreamBatch a = sa.next();
        const StreamBatch b = sb.next();
        CHECK(a.difficulty == b.difficulty);
        CHECK(a.losses == b.losses);
        CHECK(a.labels == b.labels);
        bool same = true;
        for (size_t i = 0; i < a.x.numel(); ++i) {
            if (a.x[i] != b.x[i]) same = false;
        }
        CHECK(same);
    }
    CHECK(sa.instances_seen() == 48);
}

TEST_CASE("realized hard fraction stays inside a two percent band") {
    StreamConfig cfg;
    cfg.batch = 100;
    cfg.hard_fraction = 0.45;
    cfg.seed = 5;
    SyntheticStream s(cfg);
    long hard = 0;
    long total = 0;
    for (int t = 0; t < 100; ++t) {
        const StreamBatch b = s.next();
        for (double d : b.difficulty) {
            if (d >= 0.5) ++hard;
        }
        total += cfg.batch;
    }
    REQUIRE(total == 10000);
    CHECK(hard >= 4300);
    CHECK(hard <= 4700);
}

TEST_CASE("noise-free patterns separate the two classes by half-plane") {
    StreamConfig cfg;
    cfg.batch = 64;
    cfg.noise = 0.0;
    cfg.seed = 31;
    SyntheticStream s(cfg);
    const StreamBatch b = s.next();
    const int half = cfg.h / 2;
    for (int i = 0; i < cfg.batch; ++i) {
        REQUIRE((b.labels[static_cast<size_t>(i)] == 0 || b.labels[static_cast<size_t>(i)] == 1));
        double top = 0.0;
        double bottom = 0.0;
        for (int y = 0; y < cfg.h; ++y) {
            for (int x = 0; x < cfg.w; ++x) {
                (y < half ? top : bottom) += b.x(i, 0, y, x);
            }
        }
        if (b.labels[static_cast<size_t>(i)] == 0) {
            CHECK(top > bottom);
        } else {
            CHECK(bottom > top);
        }
    }
}

TEST_CASE("oracle losses track difficulty and the decay schedule") {
    StreamConfig cfg;
    cfg.batch = 32;
    cfg.loss_jitter = 0.0;
    cfg.tau = 500.0;
    cfg.seed = 77;
    SyntheticStream s(cfg);
    CHECK(s.decay() == doctest::Approx(1.0).epsilon(1e-15));

    const double amp0 = cfg.loss_scale * s.decay();
    const StreamBatch b0 = s.next();
    for (int i = 0; i < cfg.batch; ++i) {
        CHECK(b0.losses[static_cast<size_t>(i)] ==
              doctest::Approx(b0.difficulty[static_cast<size_t>(i)] * amp0).epsilon(1e-12));
    }
    CHECK(s.decay() == doctest::Approx(std::exp(-32.0 / 500.0)).epsilon(1e-12));

    // with jitter back on, losses stay inside the +-5 percent envelope
    StreamConfig jcfg = cfg;
    jcfg.loss_jitter = 0.05;
    SyntheticStream js(jcfg);
    const double jamp = jcfg.loss_scale * js.decay();
    const StreamBatch jb = js.next();
    for (int i = 0; i < jcfg.batch; ++i) {
        const double base = jb.difficulty[static_cast<size_t>(i)] * jamp;
        CHECK(jb.losses[static_cast<size_t>(i)] >= base * 0.95 - 1e-12);
        CHECK(jb.losses[static_cast<size_t>(i)] <= base * 1.05 + 1e-12);
    }
}

TEST_CASE("stream config validation") {
    StreamConfig cfg;
    cfg.batch = 0;
    CHECK_THROWS_AS(SyntheticStream{cfg}, std::invalid_argument);
    cfg.batch = 8;
    cfg.hard_fraction = 0.0;
    CHECK_THROWS_AS(SyntheticStream{cfg}, std::invalid_argument);
    cfg.hard_fraction = 1.0;
    CHECK_THROWS_AS(SyntheticStream{cfg}, std::invalid_argument);
}

}  // TEST_SUITE synth

TEST_SUITE("config") {

TEST_CASE("defaults survive a dump and load round trip") {
    const Config defaults;
    const std::string text = dump_config(defaults);
    const std::string path = work_path("defaults.cfg");
    {
        std::ofstream out(path, std::ios::trunc);
        out << text;
    }
    const Config back = load_config(path);
    CHECK(dump_config(back) == text);
}

TEST_CASE("overridden values survive the round trip") {
    Config cfg;
    apply_kv(cfg, "run.seed", "42");
    apply_kv(cfg, "train.lr", "0.125");
    apply_kv(cfg, "eif.enabled", "off");
    apply_kv(cfg, "run.data_dir", "corpus");
    apply_kv(cfg, "emp.alpha", "0.55");
    CHECK(cfg.seed == 42);
    CHECK(cfg.lr == 0.125);
    CHECK_FALSE(cfg.eif);
    CHECK(cfg.data_dir == "corpus");
    CHECK(cfg.emp_alpha == 0.55);

    const std::string path = work_path("overrides.cfg");
    {
        std::ofstream out(path, std::ios::trunc);
        out << dump_config(cfg);
    }
    const Config back = load_config(path);
    CHECK(back.seed == 42);
    CHECK(back.lr == 0.125);
    CHECK_FALSE(back.eif);
    CHECK(back.data_dir == "corpus");
    CHECK(dump_config(back) == dump_config(cfg));
}

TEST_CASE("every accepted bool spelling parses") {
    CHECK(parse_bool("on"));
    CHECK(parse_bool("true"));
    CHECK(parse_bool("1"));
    CHECK_FALSE(parse_bool("off"));
    CHECK_FALSE(parse_bool("false"));
    CHECK_FALSE(parse_bool("0"));
    CHECK_THROWS_AS(parse_bool("maybe"), ConfigError);
    CHECK_THROWS_AS(parse_bool("ON"), ConfigError);
}

TEST_CASE("unknown keys and malformed values are rejected") {
    Config cfg;
    CHECK_THROWS_AS(apply_kv(cfg, "train.batchsize", "64"), ConfigError);
    CHECK_THROWS_AS(apply_kv(cfg, "", "64"), ConfigError);
    CHECK_THROWS_AS(apply_kv(cfg, "train.batch", "abc"), ConfigError);
    CHECK_THROWS_AS(apply_kv(cfg, "train.batch", "12x"), ConfigError);
    CHECK_THROWS_AS(apply_kv(cfg, "train.lr", "fast"), ConfigError);
    CHECK_THROWS_AS(apply_kv(cfg, "eif.enabled", "maybe"), ConfigError);
    CHECK_THROWS_AS(apply_kv(cfg, "run.seed", "-3"), ConfigError);

    // a failed assignment must not corrupt earlier fields
    CHECK(cfg.batch == Config{}.batch);
}

TEST_CASE("file syntax: comments and blanks are fine, junk is not") {
    const std::string path = work_path("syntax.cfg");
    {
        std::ofstream out(path, std::ios::trunc);
        out << "# leading comment\n";
        out << "\n";
        out << "train.batch = 32   # trailing comment\n";
        out << "  eif.r_set=0.25\n";
    }
    const Config cfg = load_config(path);
    CHECK(cfg.batch == 32);
    CHECK(cfg.r_set == 0.25);

    SUBCASE("line without an equals sign") {
        std::ofstream out(path, std::ios::trunc);
        out << "train.batch 32\n";
        out.close();
        CHECK_THROWS_AS(load_config(path), ConfigError);
    }
    SUBCASE("empty value") {
        std::ofstream out(path, std::ios::trunc);
        out << "train.batch =\n";
        out.close();
        CHECK_THROWS_AS(load_config(path), ConfigError);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(load_config(work_path("no-such.cfg")), ConfigError);
    }
}

TEST_CASE("command line overrides apply in order") {
    Config cfg;
    apply_overrides(cfg, {"train.batch=32", "emp.alpha=0.5", "train.batch=16"});
    CHECK(cfg.batch == 16);
    CHECK(cfg.emp_alpha == 0.5);
    CHECK_THROWS_AS(apply_overrides(cfg, {"train.batch"}), ConfigError);
}

}  // TEST_SUITE config

TEST_SUITE("metrics") {

TEST_CASE("cell formatting is fixed") {
    CHECK(MetricsWriter::format_cell(MetricCell{42LL}) == "42");
    CHECK(MetricsWriter::format_cell(MetricCell{-7LL}) == "-7");
    CHECK(MetricsWriter::format_cell(MetricCell{0.5}) == "0.5");
    CHECK(MetricsWriter::format_cell(MetricCell{1.0 / 3.0}) == "0.333333333333");
    CHECK(MetricsWriter::format_cell(MetricCell{1e21}) == "1e+21");
}

TEST_CASE("rows round trip through the reader") {
    const std::string path = work_path("metrics.csv");
    {
        MetricsWriter w(path, {"batch", "loss", "kept"});
        w.row({1LL, 2.5, 60LL});
        w.row({2LL, 1.25, 58LL});
        w.flush();
    }
    const MetricsTable t = read_metrics(path);
    REQUIRE(t.columns == std::vector<std::string>{"batch", "loss", "kept"});
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0][0] == 1.0);
    CHECK(t.rows[0][1] == 2.5);
    CHECK(t.rows[1][2] == 58.0);
    CHECK(t.column("loss") == 1);
    CHECK(t.column("accuracy") == -1);
}

TEST_CASE("identical values produce identical bytes") {
    auto emit = [](const std::string& path) {
        MetricsWriter w(path, {"a", "b"});
        w.row({3LL, 0.1 + 0.2});
        w.row({4LL, 1234567.875});
    };
    const std::string p1 = work_path("bytes1.csv");
    const std::string p2 = work_path("bytes2.csv");
    emit(p1);
    emit(p2);
    CHECK(read_raw(p1) == read_raw(p2));

    // the first line is the versioned marker
    const std::vector<uint8_t> raw = read_raw(p1);
    const std::string head(raw.begin(), raw.begin() + 19);
    CHECK(head == "# frugal-metrics v1");
}

TEST_CASE("shape and header violations are refused") {
    const std::string path = work_path("badmetrics.csv");
    {
        MetricsWriter w(path, {"a", "b"});
        CHECK_THROWS_AS(w.row({1LL}), std::invalid_argument);
    }
    CHECK_THROWS_AS(MetricsWriter(work_path("none.csv"), {}), std::invalid_argument);

    {
        std::ofstream out(path, std::ios::trunc);
        out << "a,b\n1,2\n";
    }
    CHECK_THROWS_AS(read_metrics(path), std::runtime_error);

    {
        std::ofstream out(path, std::ios::trunc);
        out << "# frugal-metrics v1\na,b\n1,2,3\n";
    }
    CHECK_THROWS_AS(read_metrics(path), std::runtime_error);

    CHECK_THROWS_AS(read_metrics(work_path("no-such.csv")), std::runtime_error);
}

}  // TEST_SUITE metrics

TEST_SUITE("checkpoint") {

TEST_CASE("parameters round trip bit for bit") {
    Rng ra(11);
    Network source = make_filter_net(ra, 12, 12);
    const std::string path = work_path("params.ckpt");
    save_checkpoint(path, source);

    Rng rb(99);
    Network target = make_filter_net(rb, 12, 12);
    // different init, so at least one entry differs before the load
    {
        const auto sp = source.params();
        const auto tp = target.params();
        bool differs = false;
        for (size_t i = 0; i < sp.size(); ++i) {
            for (size_t k = 0; k < sp[i]->numel(); ++k) {
                if ((*sp[i])[k] != (*tp[i])[k]) differs = true;
            }
        }
        REQUIRE(differs);
    }

    load_checkpoint(path, target);
    const auto sp = source.params();
    const auto tp = target.params();
    REQUIRE(sp.size() == tp.size());
    for (size_t i = 0; i < sp.size(); ++i) {
        REQUIRE(sp[i]->shape() == tp[i]->shape());
        for (size_t k = 0; k < sp[i]->numel(); ++k) {
            CHECK((*sp[i])[k] == (*tp[i])[k]);
        }
    }
}

TEST_CASE("mismatched targets and corrupt files are refused") {
    Rng ra(11);
    Network filter = make_filter_net(ra, 12, 12);
    const std::string path = work_path("filter.ckpt");
    save_checkpoint(path, filter);

    Rng rb(12);
    Network lenet = make_lenet(rb, 28, 28, 10);
    CHECK_THROWS_AS(load_checkpoint(path, lenet), std::runtime_error);

    const std::string junk = work_path("junk.ckpt");
    write_raw(junk, {'n', 'o', 'p', 'e'});
    CHECK_THROWS_AS(load_checkpoint(junk, filter), std::runtime_error);

    // valid header cut short
    std::vector<uint8_t> whole = read_raw(path);
    whole.resize(whole.size() / 2);
    const std::string cut = work_path("cut.ckpt");
    write_raw(cut, whole);
    CHECK_THROWS_AS(load_checkpoint(cut, filter), std::runtime_error);

    CHECK_THROWS_AS(load_checkpoint(work_path("no-such.ckpt"), filter), std::runtime_error);
}

}  // TEST_SUITE checkpoint
