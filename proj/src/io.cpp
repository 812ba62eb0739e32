#include "sesr/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>

namespace fs = std::filesystem;

namespace sesr {

namespace {

constexpr char kMagic[4] = {'S', 'E', 'S', 'R'};
constexpr std::uint32_t kVersion = 1;

enum LayerTag : std::uint8_t {
    kTagConv = 0,
    kTagConvTranspose = 1,
    kTagRelu = 2,
    kTagPrelu = 3,
    kTagDepthToSpace = 4,
    kTagResidualBegin = 5,
    kTagResidualEnd = 6,
    kTagAvgPool = 7,
    kTagFlatten = 8,
    kTagDense = 9,
    kTagLinearBlock = 10,
};

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

struct Writer {
    std::ofstream out;
    explicit Writer(const std::string& path) : out(path, std::ios::binary) {
        if (!out) throw IoError("cannot open '" + path + "' for writing");
    }
    void u8(std::uint8_t v) { out.put(static_cast<char>(v)); }
    void u32(std::uint32_t v) {
        char buf[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                       static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
        out.write(buf, 4);
    }
    void floats(const std::vector<float>& vs) {
        for (float f : vs) {
            std::uint32_t bits;
            std::memcpy(&bits, &f, 4);
            u32(bits);
        }
    }
};

struct Reader {
    std::ifstream in;
    long long offset = 0;
    explicit Reader(const std::string& path) : in(path, std::ios::binary) {
        if (!in) throw IoError("cannot open '" + path + "' for reading");
    }
    std::uint8_t u8() {
        int c = in.get();
        if (c == EOF) throw FormatError("unexpected end of file", offset);
        offset += 1;
        return static_cast<std::uint8_t>(c);
    }
    std::uint32_t u32() {
        unsigned char buf[4];
        in.read(reinterpret_cast<char*>(buf), 4);
        if (in.gcount() != 4) throw FormatError("unexpected end of file", offset);
        offset += 4;
        return static_cast<std::uint32_t>(buf[0]) | (static_cast<std::uint32_t>(buf[1]) << 8) |
               (static_cast<std::uint32_t>(buf[2]) << 16) |
               (static_cast<std::uint32_t>(buf[3]) << 24);
    }
    std::vector<float> floats(std::size_t count) {
        std::vector<float> vs(count);
        for (auto& f : vs) {
            const std::uint32_t bits = u32();
            std::memcpy(&f, &bits, 4);
        }
        return vs;
    }
};

void write_layer(Writer& w, const Layer& layer, std::map<std::string, std::uint32_t>& slot_ids) {
    auto slot_id = [&](const std::string& label) {
        auto [it, inserted] = slot_ids.emplace(label, static_cast<std::uint32_t>(slot_ids.size()));
        (void)inserted;
        return it->second;
    };
    std::uint8_t tag = 0;
    std::uint32_t d[6] = {0, 0, 0, 0, 0, 0};
    std::visit(
        overloaded{
            [&](const ConvLayer& l) {
                if (l.spec.has_bias)
                    throw FormatError("biased convs are not representable in the weight file");
                tag = kTagConv;
                d[0] = l.spec.c_out;
                d[1] = l.spec.c_in;
                d[2] = l.spec.kh;
                d[3] = l.spec.kw;
                d[4] = l.spec.stride;
                d[5] = static_cast<std::uint32_t>(l.spec.pad_h());
            },
            [&](const ConvTransposeLayer& l) {
                if (l.spec.has_bias)
                    throw FormatError("biased convs are not representable in the weight file");
                tag = kTagConvTranspose;
                d[0] = l.spec.c_out;
                d[1] = l.spec.c_in;
                d[2] = l.spec.kh;
                d[3] = l.spec.kw;
                d[4] = l.spec.stride;
                d[5] = static_cast<std::uint32_t>(l.spec.pad_h()) |
                       (static_cast<std::uint32_t>(l.spec.output_padding) << 16);
            },
            [&](const LinearBlockLayer& l) {
                tag = kTagLinearBlock;
                d[0] = l.spec.c_out;
                d[1] = l.spec.c_in;
                d[2] = l.spec.kh;
                d[3] = static_cast<std::uint32_t>(l.expansion);
                d[4] = l.short_residual ? 1 : 0;
            },
            [&](const ActivationLayer& l) {
                tag = l.kind == ActKind::Relu ? kTagRelu : kTagPrelu;
            },
            [&](const DepthToSpaceLayer& l) {
                tag = kTagDepthToSpace;
                d[0] = static_cast<std::uint32_t>(l.block);
            },
            [&](const ResidualBeginLayer& l) {
                tag = kTagResidualBegin;
                d[0] = slot_id(l.label);
            },
            [&](const ResidualEndLayer& l) {
                tag = kTagResidualEnd;
                d[0] = slot_id(l.label);
                d[1] = static_cast<std::uint32_t>(l.tile);
            },
            [&](const AvgPoolLayer&) { tag = kTagAvgPool; },
            [&](const FlattenLayer&) { tag = kTagFlatten; },
            [&](const DenseLayer& l) {
                tag = kTagDense;
                d[0] = static_cast<std::uint32_t>(l.spec.out);
                d[1] = static_cast<std::uint32_t>(l.spec.in);
            }},
        layer);
    w.u8(tag);
    for (std::uint32_t v : d) w.u32(v);
}

Layer read_layer(Reader& r, std::uint8_t tag, const std::uint32_t d[6]) {
    switch (tag) {
        case kTagConv: {
            ConvLayer l;
            l.spec = ConvSpec::explicit_pad(static_cast<int>(d[2]), static_cast<int>(d[1]),
                                            static_cast<int>(d[0]), static_cast<int>(d[4]),
                                            static_cast<int>(d[5]));
            l.spec.kw = static_cast<int>(d[3]);
            return l;
        }
        case kTagConvTranspose: {
            ConvTransposeLayer l;
            l.spec = ConvSpec::explicit_pad(static_cast<int>(d[2]), static_cast<int>(d[1]),
                                            static_cast<int>(d[0]), static_cast<int>(d[4]),
                                            static_cast<int>(d[5] & 0xffff));
            l.spec.kw = static_cast<int>(d[3]);
            l.spec.output_padding = static_cast<int>(d[5] >> 16);
            return l;
        }
        case kTagRelu: return ActivationLayer{ActKind::Relu};
        case kTagPrelu: return ActivationLayer{ActKind::Prelu};
        case kTagDepthToSpace: return DepthToSpaceLayer{static_cast<int>(d[0])};
        case kTagResidualBegin: return ResidualBeginLayer{"slot" + std::to_string(d[0])};
        case kTagResidualEnd:
            return ResidualEndLayer{"slot" + std::to_string(d[0]), static_cast<int>(d[1])};
        case kTagAvgPool: return AvgPoolLayer{};
        case kTagFlatten: return FlattenLayer{};
        case kTagDense: {
            DenseLayer l;
            l.spec.out = static_cast<int>(d[0]);
            l.spec.in = static_cast<int>(d[1]);
            return l;
        }
        case kTagLinearBlock: {
            LinearBlockLayer l;
            l.spec = ConvSpec::same(static_cast<int>(d[2]), static_cast<int>(d[1]),
                                    static_cast<int>(d[0]));
            l.expansion = static_cast<int>(d[3]);
            l.short_residual = d[4] != 0;
            return l;
        }
        default:
            throw FormatError("unknown layer tag " + std::to_string(tag), r.offset - 25);
    }
}

}  // namespace

void save_weights(const std::string& path, const NetworkSpec& net, const WeightStore& store) {
    check_weights(net, store);
    Writer w(path);
    w.out.write(kMagic, 4);
    w.u32(kVersion);
    w.u32(static_cast<std::uint32_t>(net.layers.size()));
    w.u32(static_cast<std::uint32_t>(net.scale));
    std::map<std::string, std::uint32_t> slot_ids;
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        write_layer(w, net.layers[i], slot_ids);
        w.floats(store[i]);
    }
    if (!w.out) throw IoError("write failed for '" + path + "'");
}

LoadedNetwork load_weights(const std::string& path) {
    Reader r(path);
    char magic[4];
    r.in.read(magic, 4);
    if (r.in.gcount() != 4 || std::memcmp(magic, kMagic, 4) != 0)
        throw FormatError("bad magic in '" + path + "'", 0);
    r.offset = 4;
    const std::uint32_t version = r.u32();
    if (version != kVersion)
        throw FormatError("unsupported version " + std::to_string(version), 4);
    const std::uint32_t layer_count = r.u32();
    LoadedNetwork out;
    out.net.scale = static_cast<int>(r.u32());
    out.net.name = fs::path(path).stem().string();
    for (std::uint32_t i = 0; i < layer_count; ++i) {
        const long long layer_offset = r.offset;
        const std::uint8_t tag = r.u8();
        std::uint32_t d[6];
        for (auto& v : d) v = r.u32();
        Layer layer = read_layer(r, tag, d);
        const std::size_t count = layer_param_count(layer);
        std::vector<float> values = r.floats(count);
        for (float v : values)
            if (!std::isfinite(v))
                throw FormatError("non-finite parameter in layer " + std::to_string(i),
                                  layer_offset);
        out.net.layers.push_back(std::move(layer));
        out.store.push_back(std::move(values));
    }
    return out;
}

void save_classifier(const std::string& path, const Classifier& model) {
    NetworkSpec net = model.net;
    net.scale = 1;
    save_weights(path, net, model.weights);
}

Classifier load_classifier(const std::string& path) {
    LoadedNetwork loaded = load_weights(path);
    Classifier m;
    m.net = std::move(loaded.net);
    m.weights = std::move(loaded.store);
    m.num_classes = 0;
    for (const auto& layer : m.net.layers)
        if (const auto* dense = std::get_if<DenseLayer>(&layer)) m.num_classes = dense->spec.out;
    if (m.num_classes == 0)
        throw FormatError("'" + path + "' has no dense head; not a classifier file");
    // infer the input size from pool count and dense input extent
    int pools = 0;
    int channels = 3;
    for (const auto& layer : m.net.layers) {
        if (std::holds_alternative<AvgPoolLayer>(layer)) pools += 1;
        if (const auto* conv = std::get_if<ConvLayer>(&layer)) channels = conv->spec.c_out;
    }
    const auto* dense = std::get_if<DenseLayer>(&m.net.layers.back());
    if (!dense) throw FormatError("classifier file must end with a dense layer");
    const int spatial = static_cast<int>(std::lround(
        std::sqrt(static_cast<double>(dense->spec.in) / channels)));
    m.input_size = spatial << pools;
    return m;
}

Tensor4 read_ppm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    auto next_token = [&]() {
        std::string tok;
        int c;
        while ((c = in.get()) != EOF) {
            if (c == '#') {  // comment to end of line
                while ((c = in.get()) != EOF && c != '\n') {
                }
                continue;
            }
            if (std::isspace(c)) {
                if (!tok.empty()) break;
                continue;
            }
            tok.push_back(static_cast<char>(c));
        }
        return tok;
    };
    const std::string magic = next_token();
    if (magic != "P6")
        throw FormatError("'" + path + "' is not a binary PPM (P6) file", 0);
    const std::string ws = next_token(), hs = next_token(), maxs = next_token();
    int w = 0, h = 0, maxval = 0;
    try {
        w = std::stoi(ws);
        h = std::stoi(hs);
        maxval = std::stoi(maxs);
    } catch (const std::exception&) {
        throw FormatError("'" + path + "': malformed PPM header");
    }
    if (maxval != 255)
        throw FormatError("'" + path + "': unsupported maxval " + std::to_string(maxval) +
                          " (only 255)");
    if (w <= 0 || h <= 0) throw FormatError("'" + path + "': bad dimensions");
    std::vector<unsigned char> bytes(static_cast<std::size_t>(w) * h * 3);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (in.gcount() != static_cast<std::streamsize>(bytes.size()))
        throw FormatError("'" + path + "': truncated pixel data");
    Tensor4 img(1, 3, h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c)
                img.at(0, c, y, x) =
                    static_cast<float>(bytes[(static_cast<std::size_t>(y) * w + x) * 3 + c]) / 255.0f;
    return img;
}

void write_ppm(const std::string& path, const Tensor4& image) {
    if (image.n != 1 || image.c != 3)
        throw DimensionError("write_ppm: image must be (1,3,h,w)");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << "P6\n" << image.w << " " << image.h << "\n255\n";
    std::vector<unsigned char> bytes(static_cast<std::size_t>(image.w) * image.h * 3);
    for (int y = 0; y < image.h; ++y)
        for (int x = 0; x < image.w; ++x)
            for (int c = 0; c < 3; ++c) {
                const float v = image.at(0, c, y, x);
                const int b = static_cast<int>(std::floor(v * 255.0f + 0.5f));
                bytes[(static_cast<std::size_t>(y) * image.w + x) * 3 + c] =
                    static_cast<unsigned char>(std::min(255, std::max(0, b)));
            }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for '" + path + "'");
}

Dataset load_dataset(const std::string& dir) {
    if (!fs::is_directory(dir)) throw IoError("dataset directory '" + dir + "' does not exist");
    Dataset ds;
    std::vector<std::string> class_dirs;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_directory()) class_dirs.push_back(entry.path().filename().string());
    std::sort(class_dirs.begin(), class_dirs.end());
    if (class_dirs.empty())
        throw ConfigError("dataset directory '" + dir + "' has no class subdirectories");
    for (std::size_t label = 0; label < class_dirs.size(); ++label) {
        ds.class_names.push_back(class_dirs[label]);
        std::vector<std::string> files;
        for (const auto& entry : fs::directory_iterator(fs::path(dir) / class_dirs[label]))
            if (entry.is_regular_file() && entry.path().extension() == ".ppm")
                files.push_back(entry.path().string());
        std::sort(files.begin(), files.end());
        for (const auto& file : files) {
            ds.items.push_back({read_ppm(file), static_cast<int>(label)});
            ds.paths.push_back(file);
        }
    }
    if (ds.items.empty()) throw ConfigError("dataset directory '" + dir + "' has no ppm files");
    return ds;
}

std::vector<Tensor4> load_image_dir(const std::string& dir, std::vector<std::string>* names) {
    if (!fs::is_directory(dir)) throw IoError("image directory '" + dir + "' does not exist");
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".ppm")
            files.push_back(entry.path().string());
    std::sort(files.begin(), files.end());
    std::vector<Tensor4> images;
    for (const auto& file : files) {
        images.push_back(read_ppm(file));
        if (names) names->push_back(fs::path(file).filename().string());
    }
    return images;
}

}  // namespace sesr
