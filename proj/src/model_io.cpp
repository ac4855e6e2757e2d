#include "ivis/model_io.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>

#include "ivis/error.hpp"

namespace ivis {

namespace {

constexpr std::string_view kManifestHeader = "ivis-model 1";
constexpr std::string_view kManifestEnd = "end\n";

void append_le(std::string& out, double value)
{
    auto bits = std::bit_cast<std::uint64_t>(value);
    for (int i = 0; i < 8; ++i) {
        out.push_back(static_cast<char>(bits & 0xffU));
        bits >>= 8;
    }
}

double read_le(std::string_view bytes, std::size_t offset)
{
    std::uint64_t bits = 0;
    for (int i = 7; i >= 0; --i) {
        bits = (bits << 8) | static_cast<unsigned char>(bytes[offset + static_cast<std::size_t>(i)]);
    }
    return std::bit_cast<double>(bits);
}

[[noreturn]] void manifest_error(const std::string& message)
{
    throw ModelFormatError(ModelFormatErrorKind::manifest, "model manifest: " + message);
}

struct BlobRef {
    std::size_t offset = 0;
    std::size_t count = 0;
};

std::size_t parse_size(const std::string& text, const std::string& what)
{
    try {
        std::size_t used = 0;
        const auto value = std::stoull(text, &used);
        if (used != text.size()) {
            manifest_error("bad number '" + text + "' for " + what);
        }
        return static_cast<std::size_t>(value);
    } catch (const std::logic_error&) {
        manifest_error("bad number '" + text + "' for " + what);
    }
}

BlobRef parse_blob_ref(const std::string& text, const std::string& what)
{
    const auto colon = text.find(':');
    if (colon == std::string::npos) {
        manifest_error("expected <offset>:<count> for " + what + ", got '" + text + "'");
    }
    return {parse_size(text.substr(0, colon), what), parse_size(text.substr(colon + 1), what)};
}

std::string getline_or_fail(std::istream& in, const std::string& expecting)
{
    std::string line;
    if (!std::getline(in, line)) {
        manifest_error("unexpected end, expecting " + expecting);
    }
    return line;
}

}  // namespace

std::string serialize_model(const Model& model)
{
    const auto shapes = validate_model(model);
    (void)shapes;

    std::ostringstream manifest;
    std::string blob;
    manifest << kManifestHeader << '\n';
    manifest << "input " << model.input_shape[0] << ' ' << model.input_shape[1] << ' ' << model.input_shape[2]
             << '\n';
    manifest << "pixel_norm " << to_string(model.pixel_norm) << '\n';
    manifest << "classes " << model.class_names.size() << '\n';
    for (const auto& name : model.class_names) {
        manifest << "class " << name << '\n';
    }
    manifest << "layers " << model.layers.size() << '\n';

    auto store = [&blob](const Tensor& t) {
        const auto offset = blob.size();
        for (double v : t.values()) {
            append_le(blob, v);
        }
        return std::to_string(offset) + ":" + std::to_string(t.size());
    };

    for (const auto& layer : model.layers) {
        manifest << to_string(layer.kind);
        if (layer.kind == LayerKind::conv2d) {
            const auto& s = layer.weight.shape();
            manifest << " out=" << s[0] << " in=" << s[1] << " kh=" << s[2] << " kw=" << s[3]
                     << " stride=" << layer.stride << " pad=" << layer.padding;
        } else if (layer.kind == LayerKind::dense) {
            manifest << " out=" << layer.weight.dim(0) << " in=" << layer.weight.dim(1);
        }
        if (layer.has_parameters()) {
            manifest << " weight=" << store(layer.weight);
            manifest << " bias=" << store(layer.bias);
        }
        manifest << '\n';
    }
    manifest << "blob_bytes " << blob.size() << '\n';
    manifest << kManifestEnd;

    std::string out(kModelMagic);
    out.push_back(static_cast<char>(kModelFormatVersion));
    out += manifest.str();
    out += blob;
    return out;
}

Model parse_model(std::string_view bytes)
{
    if (bytes.size() < kModelMagic.size() + 1 || bytes.substr(0, kModelMagic.size()) != kModelMagic) {
        throw ModelFormatError(ModelFormatErrorKind::bad_magic, "not a GBXM model file (bad magic bytes)");
    }
    const auto version = static_cast<unsigned char>(bytes[kModelMagic.size()]);
    if (version != kModelFormatVersion) {
        throw ModelFormatError(ModelFormatErrorKind::unsupported_version,
                               "unsupported model format version " + std::to_string(version));
    }
    const std::size_t manifest_begin = kModelMagic.size() + 1;
    std::size_t manifest_end = std::string_view::npos;
    if (bytes.substr(manifest_begin).starts_with(kManifestEnd)) {
        manifest_end = manifest_begin + kManifestEnd.size();
    } else {
        const auto at = bytes.find(std::string("\n") + std::string(kManifestEnd), manifest_begin);
        if (at != std::string_view::npos) {
            manifest_end = at + 1 + kManifestEnd.size();
        }
    }
    if (manifest_end == std::string_view::npos) {
        manifest_error("missing 'end' line");
    }
    const auto blob = bytes.substr(manifest_end);

    std::istringstream in(std::string(bytes.substr(manifest_begin, manifest_end - manifest_begin)));
    if (getline_or_fail(in, "header") != kManifestHeader) {
        manifest_error("unrecognized manifest header");
    }

    Model model;
    std::string word;
    {
        std::istringstream line(getline_or_fail(in, "input"));
        std::size_t c = 0, h = 0, w = 0;
        if (!(line >> word >> c >> h >> w) || word != "input") {
            manifest_error("expected 'input C H W'");
        }
        model.input_shape = {c, h, w};
    }
    {
        std::istringstream line(getline_or_fail(in, "pixel_norm"));
        std::string norm;
        if (!(line >> word >> norm) || word != "pixel_norm") {
            manifest_error("expected 'pixel_norm <name>'");
        }
        try {
            model.pixel_norm = parse_pixel_norm(norm);
        } catch (const ArgumentError& e) {
            manifest_error(e.what());
        }
    }
    std::size_t class_count = 0;
    {
        std::istringstream line(getline_or_fail(in, "classes"));
        if (!(line >> word >> class_count) || word != "classes") {
            manifest_error("expected 'classes N'");
        }
    }
    for (std::size_t i = 0; i < class_count; ++i) {
        const auto line = getline_or_fail(in, "class name");
        if (!line.starts_with("class ")) {
            manifest_error("expected 'class <name>'");
        }
        model.class_names.push_back(line.substr(6));
    }
    std::size_t layer_count = 0;
    {
        std::istringstream line(getline_or_fail(in, "layers"));
        if (!(line >> word >> layer_count) || word != "layers") {
            manifest_error("expected 'layers N'");
        }
    }

    struct PendingLayer {
        LayerSpec spec;
        Shape weight_shape;
        BlobRef weight, bias;
    };
    std::vector<PendingLayer> pending;
    for (std::size_t i = 0; i < layer_count; ++i) {
        std::istringstream line(getline_or_fail(in, "layer " + std::to_string(i)));
        std::string kind;
        line >> kind;
        std::map<std::string, std::string> fields;
        for (std::string token; line >> token;) {
            const auto eq = token.find('=');
            if (eq == std::string::npos) {
                manifest_error("layer " + std::to_string(i) + ": malformed field '" + token + "'");
            }
            fields[token.substr(0, eq)] = token.substr(eq + 1);
        }
        auto field = [&](const std::string& key) {
            const auto it = fields.find(key);
            if (it == fields.end()) {
                manifest_error("layer " + std::to_string(i) + " (" + kind + "): missing '" + key + "'");
            }
            return it->second;
        };
        PendingLayer layer;
        const auto what = "layer " + std::to_string(i);
        if (kind == "conv2d") {
            layer.spec.kind = LayerKind::conv2d;
            layer.weight_shape = {parse_size(field("out"), what), parse_size(field("in"), what),
                                  parse_size(field("kh"), what), parse_size(field("kw"), what)};
            layer.spec.stride = parse_size(field("stride"), what);
            layer.spec.padding = parse_size(field("pad"), what);
        } else if (kind == "dense") {
            layer.spec.kind = LayerKind::dense;
            layer.weight_shape = {parse_size(field("out"), what), parse_size(field("in"), what)};
        } else if (kind == "relu") {
            layer.spec.kind = LayerKind::relu;
        } else if (kind == "maxpool2x2") {
            layer.spec.kind = LayerKind::maxpool2x2;
        } else if (kind == "avgpool_global") {
            layer.spec.kind = LayerKind::avgpool_global;
        } else if (kind == "flatten") {
            layer.spec.kind = LayerKind::flatten;
        } else {
            manifest_error(what + ": unknown layer kind '" + kind + "'");
        }
        if (layer.spec.has_parameters()) {
            layer.weight = parse_blob_ref(field("weight"), what);
            layer.bias = parse_blob_ref(field("bias"), what);
            const auto declared = element_count(layer.weight_shape);
            if (layer.weight.count != declared) {
                throw ModelFormatError(ModelFormatErrorKind::shape,
                                       what + " (" + kind + "): declares weight " +
                                           shape_string(layer.weight_shape) + " (" + std::to_string(declared) +
                                           " values) but stores " + std::to_string(layer.weight.count));
            }
            if (layer.bias.count != layer.weight_shape[0]) {
                throw ModelFormatError(ModelFormatErrorKind::shape,
                                       what + " (" + kind + "): declares " + std::to_string(layer.weight_shape[0]) +
                                           " outputs but stores " + std::to_string(layer.bias.count) + " biases");
            }
        }
        pending.push_back(std::move(layer));
    }
    std::size_t blob_bytes = 0;
    {
        std::istringstream line(getline_or_fail(in, "blob_bytes"));
        if (!(line >> word >> blob_bytes) || word != "blob_bytes") {
            manifest_error("expected 'blob_bytes N'");
        }
    }
    if (blob.size() != blob_bytes) {
        throw ModelFormatError(ModelFormatErrorKind::length_mismatch,
                               "weight blob is " + std::to_string(blob.size()) + " bytes, manifest declares " +
                                   std::to_string(blob_bytes));
    }

    auto load = [&](const BlobRef& ref, Shape shape, std::size_t index) {
        if (ref.offset % 8 != 0 || ref.offset > blob.size() || ref.count > (blob.size() - ref.offset) / 8) {
            throw ModelFormatError(ModelFormatErrorKind::length_mismatch,
                                   "layer " + std::to_string(index) + ": parameter range " +
                                       std::to_string(ref.offset) + "+" + std::to_string(ref.count * 8) +
                                       " bytes exceeds the weight blob");
        }
        std::vector<double> values(ref.count);
        for (std::size_t k = 0; k < ref.count; ++k) {
            values[k] = read_le(blob, ref.offset + 8 * k);
        }
        return Tensor(std::move(shape), std::move(values));
    };

    for (std::size_t i = 0; i < pending.size(); ++i) {
        auto& layer = pending[i];
        if (layer.spec.has_parameters()) {
            layer.spec.weight = load(layer.weight, layer.weight_shape, i);
            layer.spec.bias = load(layer.bias, {layer.weight_shape[0]}, i);
        }
        model.layers.push_back(std::move(layer.spec));
    }

    try {
        (void)validate_model(model);
    } catch (const ShapeError& e) {
        throw ModelFormatError(ModelFormatErrorKind::shape, e.what());
    }
    return model;
}

void save_model(const Model& model, const std::filesystem::path& path)
{
    const auto bytes = serialize_model(model);
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ModelFormatError(ModelFormatErrorKind::io, "cannot open '" + path.string() + "' for writing");
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw ModelFormatError(ModelFormatErrorKind::io, "failed writing '" + path.string() + "'");
    }
}

Model load_model(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ModelFormatError(ModelFormatErrorKind::io, "cannot open '" + path.string() + "'");
    }
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_model(bytes);
}

}  // namespace ivis
