#include "faae/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "faae/config_json.hpp"

namespace faae {

namespace {

constexpr char kMagic[8] = {'F', 'A', 'A', 'E', 'C', 'K', 'P', 'T'};

void put_u32le(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64le(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64le(std::string& out, double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, sizeof(bits));
    put_u64le(out, bits);
}

class ByteCursor {
public:
    ByteCursor(const std::string& bytes, const std::string& path)
        : bytes_(bytes), path_(path) {}

    void require(std::size_t n) const {
        if (pos_ + n > bytes_.size())
            throw std::runtime_error("checkpoint truncated: " + path_);
    }

    void read_raw(void* dst, std::size_t n) {
        require(n);
        std::memcpy(dst, bytes_.data() + pos_, n);
        pos_ += n;
    }

    std::uint32_t read_u32le() {
        require(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
        pos_ += 4;
        return v;
    }

    std::uint64_t read_u64le() {
        require(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
        pos_ += 8;
        return v;
    }

    double read_f64le() {
        const std::uint64_t bits = read_u64le();
        double d;
        std::memcpy(&d, &bits, sizeof(d));
        return d;
    }

    std::string read_bytes(std::size_t n) {
        require(n);
        std::string s = bytes_.substr(pos_, n);
        pos_ += n;
        return s;
    }

    bool exhausted() const { return pos_ == bytes_.size(); }

private:
    const std::string& bytes_;
    std::string path_;
    std::size_t pos_ = 0;
};

nlohmann::json layer_shapes(const FeedForward& net) {
    nlohmann::json shapes = nlohmann::json::array();
    for (const DenseLayer& layer : net.layers())
        shapes.push_back({layer.out_dim(), layer.in_dim()});
    return shapes;
}

void check_shapes(const nlohmann::json& stored, const FeedForward& net, const char* stack) {
    const nlohmann::json expected = layer_shapes(net);
    if (stored != expected)
        throw std::runtime_error(std::string("checkpoint ") + stack +
                                 " layer shapes do not match its configuration");
}

}  // namespace

Checkpoint Checkpoint::from_model(const FaaeModel& model, const Normalization& normalization,
                                  const CovariateEncoder& encoder,
                                  std::vector<std::string> train_subject_ids,
                                  std::vector<std::string> region_names) {
    Checkpoint ckpt;
    ckpt.config = model.config;
    ckpt.encoder_params = model.encoder.param_vector();
    ckpt.decoder_params = model.decoder.param_vector();
    ckpt.discriminator_params = model.discriminator.param_vector();
    ckpt.normalization = normalization;
    ckpt.icv_cuts = encoder.icv_cuts;
    ckpt.train_subject_ids = std::move(train_subject_ids);
    ckpt.region_names = std::move(region_names);
    return ckpt;
}

FaaeModel Checkpoint::restore() const {
    FaaeModel model = make_model(config);
    model.encoder.set_param_vector(encoder_params);
    model.decoder.set_param_vector(decoder_params);
    model.discriminator.set_param_vector(discriminator_params);
    return model;
}

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint) {
    // Rebuild the stacks to validate parameter counts and to record shapes.
    FaaeModel shape_model = make_model(checkpoint.config);
    if (checkpoint.encoder_params.size() != shape_model.encoder.param_count() ||
        checkpoint.decoder_params.size() != shape_model.decoder.param_count() ||
        checkpoint.discriminator_params.size() != shape_model.discriminator.param_count())
        throw std::invalid_argument("checkpoint parameter counts do not match its configuration");

    nlohmann::json header;
    header["config"] = model_config_to_json(checkpoint.config);
    header["layers"] = {{"encoder", layer_shapes(shape_model.encoder)},
                        {"decoder", layer_shapes(shape_model.decoder)},
                        {"discriminator", layer_shapes(shape_model.discriminator)}};
    header["normalization"] = {{"mean", checkpoint.normalization.mean},
                               {"std", checkpoint.normalization.std}};
    header["icv_cuts"] = checkpoint.icv_cuts;
    header["train_subject_ids"] = checkpoint.train_subject_ids;
    header["region_names"] = checkpoint.region_names;
    const std::string header_bytes = header.dump();

    std::string out;
    out.append(kMagic, sizeof(kMagic));
    put_u32le(out, kCheckpointVersion);
    put_u64le(out, header_bytes.size());
    out += header_bytes;
    for (double p : checkpoint.encoder_params) put_f64le(out, p);
    for (double p : checkpoint.decoder_params) put_f64le(out, p);
    for (double p : checkpoint.discriminator_params) put_f64le(out, p);

    std::ofstream file(path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot write checkpoint file: " + path);
    file.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!file) throw std::runtime_error("failed while writing checkpoint file: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot open checkpoint file: " + path);
    std::string bytes((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());

    ByteCursor cursor(bytes, path);
    char magic[8];
    cursor.read_raw(magic, sizeof(magic));
    if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("not a model checkpoint (bad magic): " + path);
    const std::uint32_t version = cursor.read_u32le();
    if (version != kCheckpointVersion)
        throw std::runtime_error("unsupported checkpoint version " + std::to_string(version) +
                                 " (expected " + std::to_string(kCheckpointVersion) + "): " + path);
    const std::uint64_t header_len = cursor.read_u64le();
    const std::string header_bytes = cursor.read_bytes(header_len);

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(header_bytes);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error("checkpoint header is not valid JSON: " + path + " (" +
                                 e.what() + ")");
    }

    Checkpoint ckpt;
    ckpt.config = model_config_from_json(header.at("config"), "checkpoint config");
    ckpt.normalization.mean = header.at("normalization").at("mean").get<Vec>();
    ckpt.normalization.std = header.at("normalization").at("std").get<Vec>();
    ckpt.icv_cuts = header.at("icv_cuts").get<Vec>();
    ckpt.train_subject_ids = header.at("train_subject_ids").get<std::vector<std::string>>();
    ckpt.region_names = header.at("region_names").get<std::vector<std::string>>();

    FaaeModel shape_model = make_model(ckpt.config);
    check_shapes(header.at("layers").at("encoder"), shape_model.encoder, "encoder");
    check_shapes(header.at("layers").at("decoder"), shape_model.decoder, "decoder");
    check_shapes(header.at("layers").at("discriminator"), shape_model.discriminator,
                 "discriminator");

    ckpt.encoder_params.resize(shape_model.encoder.param_count());
    ckpt.decoder_params.resize(shape_model.decoder.param_count());
    ckpt.discriminator_params.resize(shape_model.discriminator.param_count());
    for (double& p : ckpt.encoder_params) p = cursor.read_f64le();
    for (double& p : ckpt.decoder_params) p = cursor.read_f64le();
    for (double& p : ckpt.discriminator_params) p = cursor.read_f64le();
    if (!cursor.exhausted())
        throw std::runtime_error("checkpoint has trailing bytes: " + path);
    return ckpt;
}

}  // namespace faae
