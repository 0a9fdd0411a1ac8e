#include "strokeml/pipeline/bundle.hpp"

#include <fstream>
#include <sstream>

#include "strokeml/error.hpp"
#include "strokeml/io/codec.hpp"

namespace strokeml::pipeline {

std::string serialize_bundle(const RunRecord& record, const FittedPipeline& model) {
    const std::string payload = nlohmann::json{{"record", record_to_json(record)}, {"model", model.to_json()}}.dump();
    const nlohmann::json header = {{"format", kBundleFormat},
                                   {"version", kBundleVersion},
                                   {"payload_bytes", payload.size()},
                                   {"sha256", io::sha256_hex(payload)}};
    return header.dump() + "\n" + payload;
}

Bundle parse_bundle(const std::string& bytes) {
    const auto newline = bytes.find('\n');
    if (newline == std::string::npos) throw Error(ErrorCode::CorruptPayload, "bundle has no header line");
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(bytes.substr(0, newline));
    } catch (const nlohmann::json::exception&) {
        throw Error(ErrorCode::CorruptPayload, "bundle header is not valid JSON");
    }
    if (!header.is_object() || header.value("format", "") != kBundleFormat) {
        throw Error(ErrorCode::CorruptPayload, "not a strokeml bundle");
    }
    const auto version = header.value("version", -1);
    if (version != kBundleVersion) {
        throw Error(ErrorCode::VersionMismatch, "bundle version " + std::to_string(version) +
                                                    ", this build reads version " + std::to_string(kBundleVersion));
    }
    const std::string payload = bytes.substr(newline + 1);
    if (payload.size() != header.value("payload_bytes", std::size_t{0}) ||
        io::sha256_hex(payload) != header.value("sha256", "")) {
        throw Error(ErrorCode::CorruptPayload, "bundle checksum does not match its payload");
    }
    try {
        const auto j = nlohmann::json::parse(payload);
        return Bundle{record_from_json(j.at("record")), FittedPipeline::from_json(j.at("model"))};
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::CorruptPayload, std::string("bundle payload: ") + e.what());
    }
}

void save_bundle(const RunRecord& record, const FittedPipeline& model, const std::filesystem::path& path) {
    const std::string bytes = serialize_bundle(record, model);
    std::ofstream out(path, std::ios::binary);
    if (!out || !out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()))) {
        throw Error(ErrorCode::UnwritablePath, "cannot write bundle '" + path.string() + "'");
    }
}

Bundle load_bundle(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot read bundle '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_bundle(ss.str());
}

}  // namespace strokeml::pipeline
