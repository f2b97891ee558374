#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "signdict/catalog.hpp"
#include "signdict/synth.hpp"

namespace signdict {

// A dataset directory holds pose files plus labels.tsv, one
// "<file name>\t<rendition_id>" line per sample, in sample order.
inline constexpr const char* kLabelsFile = "labels.tsv";

void write_dataset(const std::filesystem::path& dir, std::span<const LabeledSequence> samples,
                   const VocabularyCatalog& catalog);
std::vector<LabeledSequence> load_dataset(const std::filesystem::path& dir, const VocabularyCatalog& catalog);

}  // namespace signdict
