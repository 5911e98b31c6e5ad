#pragma once

#include "cascade/metrics.hpp"

#include <filesystem>
#include <string>

namespace cascade {

// Judgment lines: `qid 0 docid grade`, whitespace-separated.
Qrels load_qrels(const std::filesystem::path& path);
void save_qrels(const std::filesystem::path& path, const Qrels& qrels);

// Run lines: `qid Q0 docid rank score tag`. Scores are written with
// shortest-round-trip formatting so a write/read cycle is lossless.
Run load_run(const std::filesystem::path& path);
void write_run(const std::filesystem::path& path, const Run& run, const std::string& tag);

} // namespace cascade
