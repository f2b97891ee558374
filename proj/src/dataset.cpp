#include "signdict/dataset.hpp"

#include <cstdio>
#include <map>

#include "signdict/error.hpp"
#include "signdict/text.hpp"

namespace signdict {

namespace fs = std::filesystem;

void write_dataset(const fs::path& dir, std::span<const LabeledSequence> samples, const VocabularyCatalog& catalog) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::io, "cannot create " + dir.string() + ": " + ec.message());
  std::map<ClassIndex, std::size_t> counters;
  std::string labels;
  for (const auto& s : samples) {
    const std::string& id = catalog.rendition_of(s.label);
    char suffix[32];
    std::snprintf(suffix, sizeof suffix, "-%04zu.pose", counters[s.label]++);
    const std::string name = id + suffix;
    write_pose_file(s.sequence, dir / name);
    labels += name + "\t" + id + "\n";
  }
  write_text_file(dir / kLabelsFile, labels);
}

std::vector<LabeledSequence> load_dataset(const fs::path& dir, const VocabularyCatalog& catalog) {
  const fs::path labels_path = dir / kLabelsFile;
  if (!fs::exists(labels_path)) throw Error(ErrorCode::not_found, "no " + std::string(kLabelsFile) + " in " + dir.string());
  std::vector<LabeledSequence> out;
  std::size_t line_no = 0;
  const std::string text = read_text_file(labels_path);
  for (const auto& raw : split_lines(text)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split(line, '\t');
    const std::string where = labels_path.string() + " line " + std::to_string(line_no) + ": ";
    if (fields.size() != 2) throw Error(ErrorCode::parse, where + "expected <file>\\t<rendition_id>");
    const auto cls = catalog.find(fields[1]);
    if (!cls) throw Error(ErrorCode::unknown_token, where + "rendition '" + std::string(fields[1]) + "' not in catalog");
    const fs::path file = dir / std::string(fields[0]);
    try {
      out.push_back({parse_pose_file(file), *cls});
    } catch (const Error& e) {
      throw Error(e.code(), file.string() + ": " + e.what());
    }
  }
  if (out.empty()) throw Error(ErrorCode::invalid_argument, "dataset " + dir.string() + " is empty");
  return out;
}

}  // namespace signdict
