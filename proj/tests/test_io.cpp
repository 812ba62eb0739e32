#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "sesr/io.hpp"
#include "sesr/models.hpp"
#include "sesr/synth.hpp"

using namespace sesr;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / ("sesr_io_" + std::to_string(::getpid()))) {
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("weight file round trip returns identical floats") {
    TempDir tmp;
    for (NetForm form : {NetForm::Collapsed, NetForm::Expanded}) {
        const NetworkSpec net = build_sesr(SesrConfig::m2(), form);
        const WeightStore store = init_weights(net, 21);
        const std::string path = tmp.file("m2.wts");
        save_weights(path, net, store);
        const LoadedNetwork loaded = load_weights(path);
        REQUIRE(loaded.store.size() == store.size());
        for (std::size_t i = 0; i < store.size(); ++i) CHECK(loaded.store[i] == store[i]);
        CHECK(loaded.net.scale == net.scale);
        CHECK(count_params(loaded.net) == count_params(net));
        // a reload runs the same forward pass
        Rng rng(5);
        Tensor4 x = Tensor4::random_uniform(1, 3, 8, 8, rng);
        CHECK(max_abs_diff(forward(net, store, x), forward(loaded.net, loaded.store, x)) == 0.0f);
    }
}

TEST_CASE("file size decomposes into header, layer headers and payload") {
    TempDir tmp;
    const NetworkSpec net = build_sesr(SesrConfig::m2(), NetForm::Collapsed);
    const WeightStore store = init_weights(net, 3);
    const std::string path = tmp.file("m2.wts");
    save_weights(path, net, store);
    const std::uintmax_t size = fs::file_size(path);
    // 16-byte header, 25 bytes per layer record, 4 bytes per parameter
    CHECK(size == 16 + net.layers.size() * 25 + count_params(net) * 4);
    CHECK(count_params(net) == 10608);
}

TEST_CASE("truncated files fail with the offset named") {
    TempDir tmp;
    const NetworkSpec net = build_sesr(SesrConfig::m2(), NetForm::Collapsed);
    save_weights(tmp.file("full.wts"), net, init_weights(net, 3));
    std::ifstream in(tmp.file("full.wts"), std::ios::binary);
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)), {});
    bytes.resize(bytes.size() / 2);
    std::ofstream out(tmp.file("cut.wts"), std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.close();
    try {
        load_weights(tmp.file("cut.wts"));
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(e.byte_offset > 0);
        CHECK(std::string(e.what()).find("byte") != std::string::npos);
    }
}

TEST_CASE("bad magic and bad version are rejected") {
    TempDir tmp;
    {
        std::ofstream out(tmp.file("bad.wts"), std::ios::binary);
        out << "NOPExxxxxxxxxxxxxxxx";
    }
    CHECK_THROWS_AS(load_weights(tmp.file("bad.wts")), FormatError);
    CHECK_THROWS_AS(load_weights(tmp.file("missing.wts")), IoError);
}

TEST_CASE("classifier round trip preserves the input contract") {
    TempDir tmp;
    const Classifier m = build_toy_classifier(32, 4, 9);
    save_classifier(tmp.file("cls.wts"), m);
    const Classifier loaded = load_classifier(tmp.file("cls.wts"));
    CHECK(loaded.input_size == 32);
    CHECK(loaded.num_classes == 4);
    Rng rng(2);
    Tensor4 x = Tensor4::random_uniform(1, 3, 32, 32, rng);
    CHECK(classify(m, x) == classify(loaded, x));
}

TEST_CASE("ppm: grid values survive a write/read round trip") {
    TempDir tmp;
    Tensor4 img(1, 3, 4, 5);
    Rng rng(77);
    for (auto& v : img.data)
        v = static_cast<float>(rng.next_below(256)) / 255.0f;  // on the byte grid
    write_ppm(tmp.file("a.ppm"), img);
    const Tensor4 back = read_ppm(tmp.file("a.ppm"));
    CHECK(max_abs_diff(back, img) == 0.0f);
}

TEST_CASE("ppm: known byte pattern decodes to the expected floats") {
    TempDir tmp;
    {
        std::ofstream out(tmp.file("two.ppm"), std::ios::binary);
        out << "P6\n2 2\n255\n";
        const unsigned char bytes[] = {0,  0,   0,   255, 255, 255,
                                       51, 102, 153, 255, 0,   0};
        out.write(reinterpret_cast<const char*>(bytes), sizeof(bytes));
    }
    const Tensor4 img = read_ppm(tmp.file("two.ppm"));
    REQUIRE(img.h == 2);
    REQUIRE(img.w == 2);
    CHECK(img.at(0, 0, 0, 0) == 0.0f);
    CHECK(img.at(0, 0, 0, 1) == 1.0f);
    CHECK(img.at(0, 0, 1, 0) == doctest::Approx(51.0f / 255.0f));
    CHECK(img.at(0, 1, 1, 0) == doctest::Approx(102.0f / 255.0f));
    CHECK(img.at(0, 2, 1, 0) == doctest::Approx(153.0f / 255.0f));
    CHECK(img.at(0, 0, 1, 1) == 1.0f);
    CHECK(img.at(0, 1, 1, 1) == 0.0f);
}

TEST_CASE("ppm: write(read(f)) is idempotent") {
    TempDir tmp;
    Rng rng(3);
    Tensor4 img = Tensor4::random_uniform(1, 3, 6, 6, rng);  // off-grid values
    write_ppm(tmp.file("f.ppm"), img);
    const Tensor4 once = read_ppm(tmp.file("f.ppm"));
    write_ppm(tmp.file("g.ppm"), once);
    const Tensor4 twice = read_ppm(tmp.file("g.ppm"));
    CHECK(once.data == twice.data);
}

TEST_CASE("ppm: unsupported formats are rejected") {
    TempDir tmp;
    {
        std::ofstream out(tmp.file("p5.ppm"), std::ios::binary);
        out << "P5\n2 2\n255\n....";
    }
    CHECK_THROWS_AS(read_ppm(tmp.file("p5.ppm")), FormatError);
    {
        std::ofstream out(tmp.file("m64.ppm"), std::ios::binary);
        out << "P6\n2 2\n64\n";
        for (int i = 0; i < 12; ++i) out.put(1);
    }
    CHECK_THROWS_AS(read_ppm(tmp.file("m64.ppm")), FormatError);
}

TEST_CASE("labeled dataset loading reads subdirectory labels in sorted order") {
    TempDir tmp;
    write_texture_dataset(tmp.file("data"), 2, 16, 5);
    const Dataset ds = load_dataset(tmp.file("data"));
    CHECK(ds.class_names == texture_class_names());
    CHECK(ds.items.size() == 8);
    for (const auto& item : ds.items) {
        CHECK(item.image.h == 16);
        CHECK(item.label >= 0);
        CHECK(item.label < 4);
    }
    CHECK_THROWS_AS(load_dataset(tmp.file("nope")), IoError);
}
