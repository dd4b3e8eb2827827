#ifndef VSAD_IO_HPP
#define VSAD_IO_HPP

#include <filesystem>
#include <string>
#include <utility>

#include "vsad/codebook.hpp"
#include "vsad/core.hpp"

namespace vsad::io {

// Binary bundle layout, all little-endian:
//   magic "VSBN" | version u32 | N u64 | D u32 | K u32
//   N*D float32 descriptors row-major | N*K float32 probabilities row-major
// File length is 24 + 4*N*(D+K) bytes. Values are widened to 64-bit on read.
inline constexpr char kBundleMagic[4] = {'V', 'S', 'B', 'N'};
inline constexpr std::uint32_t kBundleVersion = 1;

void write_bundle(const DescriptorMatrix& desc, const ProbabilityMatrix& prob,
                  const std::filesystem::path& path);
std::pair<DescriptorMatrix, ProbabilityMatrix> read_bundle(const std::filesystem::path& path);

// Codebooks are stored as a JSON document with lossless number round-trip.
void write_codebook(const SemanticCodebook& codebook, const std::filesystem::path& path);
SemanticCodebook read_codebook(const std::filesystem::path& path);

// Manifest: one line per image, `image_id TAB start TAB end TAB label`,
// label "-" when absent.
void write_manifest(const PatchManifest& manifest, const std::filesystem::path& path);
PatchManifest read_manifest(const std::filesystem::path& path);

// Writes to a sibling temp file then renames, so readers never observe a
// partially written artifact.
void atomic_write(const std::filesystem::path& path, const std::string& bytes);

std::string read_file(const std::filesystem::path& path);

}  // namespace vsad::io

#endif
