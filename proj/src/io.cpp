#include "vsad/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "json_util.hpp"

namespace vsad::io {

namespace {

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f32(std::string& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }

std::uint32_t get_u32(const std::string& in, std::size_t at) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
        v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
    return v;
}

std::uint64_t get_u64(const std::string& in, std::size_t at) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
    return v;
}

float get_f32(const std::string& in, std::size_t at) {
    return std::bit_cast<float>(get_u32(in, at));
}

void append_matrix_f32(std::string& out, const Matrix& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            put_f32(out, static_cast<float>(m(i, j)));
}

}  // namespace

void atomic_write(const std::filesystem::path& path, const std::string& bytes) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::IoError, "cannot open " + tmp.string() + " for writing");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw Error(ErrorCode::IoError, "short write to " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error(ErrorCode::IoError, "rename to " + path.string() + " failed: " + ec.message());
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    if (!in.good() && !in.eof()) throw Error(ErrorCode::IoError, "read failed for " + path.string());
    return std::move(buf).str();
}

void write_bundle(const DescriptorMatrix& desc, const ProbabilityMatrix& prob,
                  const std::filesystem::path& path) {
    if (desc.n_patches() != prob.n_patches())
        throw Error(ErrorCode::MismatchedRows, "descriptor/probability row counts disagree");
    if (!desc.data.allFinite() || !prob.data.allFinite())
        throw Error(ErrorCode::NonFinite, "refusing to write NaN/Inf bundle");

    std::string out;
    const auto n = static_cast<std::uint64_t>(desc.n_patches());
    out.reserve(24 + 4 * static_cast<std::size_t>(n) *
                         static_cast<std::size_t>(desc.dim() + prob.n_classes()));
    out.append(kBundleMagic, 4);
    put_u32(out, kBundleVersion);
    put_u64(out, n);
    put_u32(out, static_cast<std::uint32_t>(desc.dim()));
    put_u32(out, static_cast<std::uint32_t>(prob.n_classes()));
    append_matrix_f32(out, desc.data);
    append_matrix_f32(out, prob.data);
    atomic_write(path, out);
}

std::pair<DescriptorMatrix, ProbabilityMatrix> read_bundle(const std::filesystem::path& path) {
    const std::string in = read_file(path);
    if (in.size() < 24) throw Error(ErrorCode::TruncatedFile, path.string() + " shorter than header");
    if (std::memcmp(in.data(), kBundleMagic, 4) != 0)
        throw Error(ErrorCode::BadMagic, path.string() + " is not a bundle file");
    const std::uint32_t version = get_u32(in, 4);
    if (version != kBundleVersion)
        throw Error(ErrorCode::UnsupportedVersion,
                    "bundle version " + std::to_string(version) + " unsupported");
    const std::uint64_t n = get_u64(in, 8);
    const std::uint32_t d = get_u32(in, 16);
    const std::uint32_t k = get_u32(in, 20);
    const std::size_t expected = 24 + 4 * static_cast<std::size_t>(n) * (static_cast<std::size_t>(d) + k);
    if (in.size() != expected)
        throw Error(ErrorCode::TruncatedFile, path.string() + " length " +
                                                  std::to_string(in.size()) + ", expected " +
                                                  std::to_string(expected));

    DescriptorMatrix desc{Matrix(static_cast<Eigen::Index>(n), d)};
    ProbabilityMatrix prob{Matrix(static_cast<Eigen::Index>(n), k)};
    std::size_t at = 24;
    for (Eigen::Index i = 0; i < desc.data.rows(); ++i)
        for (Eigen::Index j = 0; j < desc.data.cols(); ++j, at += 4)
            desc.data(i, j) = static_cast<double>(get_f32(in, at));
    for (Eigen::Index i = 0; i < prob.data.rows(); ++i)
        for (Eigen::Index j = 0; j < prob.data.cols(); ++j, at += 4)
            prob.data(i, j) = static_cast<double>(get_f32(in, at));
    return {std::move(desc), std::move(prob)};
}

void write_codebook(const SemanticCodebook& codebook, const std::filesystem::path& path) {
    codebook.check();
    nlohmann::json j;
    j["kind"] = "semantic-codebook";
    j["k"] = codebook.k;
    j["d"] = codebook.d;
    j["pi"] = std::vector<double>(codebook.pi.begin(), codebook.pi.end());
    j["mass"] = std::vector<double>(codebook.mass.begin(), codebook.mass.end());
    j["mu"] = detail::matrix_to_json(codebook.mu);
    j["sigma"] = detail::matrix_to_json(codebook.sigma);
    j["active"] = codebook.active;
    j["total_mass"] = codebook.total_mass;
    j["variance_floor"] = codebook.variance_floor;
    j["provenance"] = codebook.provenance;
    if (!codebook.selected_ids.empty()) j["selected_ids"] = codebook.selected_ids;
    atomic_write(path, j.dump(2) + "\n");
}

SemanticCodebook read_codebook(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
    }
    SemanticCodebook cb;
    try {
        if (j.at("kind").get<std::string>() != "semantic-codebook")
            throw Error(ErrorCode::ParseError, path.string() + " is not a codebook file");
        cb.k = j.at("k").get<Eigen::Index>();
        cb.d = j.at("d").get<Eigen::Index>();
        auto pi = j.at("pi").get<std::vector<double>>();
        auto mass = j.at("mass").get<std::vector<double>>();
        cb.pi = Eigen::Map<const Vector>(pi.data(), static_cast<Eigen::Index>(pi.size()));
        cb.mass = Eigen::Map<const Vector>(mass.data(), static_cast<Eigen::Index>(mass.size()));
        cb.mu = detail::matrix_from_json(j.at("mu"), cb.k, cb.d);
        cb.sigma = detail::matrix_from_json(j.at("sigma"), cb.k, cb.d);
        cb.active = j.at("active").get<std::vector<bool>>();
        cb.total_mass = j.at("total_mass").get<double>();
        cb.variance_floor = j.at("variance_floor").get<double>();
        cb.provenance = j.at("provenance").get<std::string>();
        if (j.contains("selected_ids")) cb.selected_ids = j.at("selected_ids").get<std::vector<int>>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
    }
    cb.check();
    // Prior mass must concentrate on active codewords.
    double active_pi = 0.0;
    for (Eigen::Index k = 0; k < cb.k; ++k)
        if (cb.active[static_cast<std::size_t>(k)]) active_pi += cb.pi[k];
    if (std::abs(active_pi - 1.0) > 1e-6)
        throw Error(ErrorCode::InvariantViolation, "active priors sum to " + std::to_string(active_pi));
    return cb;
}

void write_manifest(const PatchManifest& manifest, const std::filesystem::path& path) {
    manifest.check();
    std::ostringstream out;
    for (std::size_t i = 0; i < manifest.n_images(); ++i) {
        out << manifest.image_ids[i] << '\t' << manifest.patch_ranges[i].start << '\t'
            << manifest.patch_ranges[i].end << '\t';
        if (manifest.labels[i] == kNoLabel)
            out << '-';
        else
            out << manifest.labels[i];
        out << '\n';
    }
    atomic_write(path, std::move(out).str());
}

PatchManifest read_manifest(const std::filesystem::path& path) {
    std::istringstream in(read_file(path));
    PatchManifest manifest;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string id, start, end, label;
        if (!std::getline(fields, id, '\t') || !std::getline(fields, start, '\t') ||
            !std::getline(fields, end, '\t') || !std::getline(fields, label))
            throw Error(ErrorCode::ParseError,
                        path.string() + ":" + std::to_string(line_no) + ": expected 4 tab fields");
        try {
            manifest.image_ids.push_back(id);
            manifest.patch_ranges.push_back({std::stoull(start), std::stoull(end)});
            manifest.labels.push_back(label == "-" ? kNoLabel : std::stoi(label));
        } catch (const std::exception&) {
            throw Error(ErrorCode::ParseError,
                        path.string() + ":" + std::to_string(line_no) + ": bad numeric field");
        }
    }
    manifest.check();
    return manifest;
}

}  // namespace vsad::io
