#include "scaner/synth/templates.hpp"

#include <fstream>

#include "scaner/common/error.hpp"

#ifndef SCANER_TEMPLATE_DIR
#define SCANER_TEMPLATE_DIR "data/templates"
#endif

namespace scaner::synth {

namespace {

std::vector<Template> load_pool(const std::filesystem::path& path, bool with_method, std::size_t min_size) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open template file " + path.string());
  std::vector<Template> pool;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    Template t;
    if (with_method) {
      const auto tab = line.find('\t');
      if (tab == std::string::npos) {
        throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected METHOD<TAB>sentence");
      }
      const std::string method = line.substr(0, tab);
      if (method != "-") t.method = parse_sa_method(method);
      t.text = line.substr(tab + 1);
    } else {
      t.text = line;
    }
    if (t.text.empty() || t.text.back() != '.') {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": template must end with '.'");
    }
    pool.push_back(std::move(t));
  }
  if (pool.size() < min_size) {
    throw DataError(path.string() + ": needs at least " + std::to_string(min_size) + " templates, found " +
                    std::to_string(pool.size()));
  }
  return pool;
}

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
}

}  // namespace

TemplatePools TemplatePools::load(const std::filesystem::path& dir, std::size_t min_pool_size) {
  TemplatePools p;
  p.sa_positive = load_pool(dir / "sa_positive.txt", true, min_pool_size);
  p.sa_negative = load_pool(dir / "sa_negative.txt", true, min_pool_size);
  p.sa_unsure = load_pool(dir / "sa_unsure.txt", true, min_pool_size);
  p.si_positive = load_pool(dir / "si_positive.txt", true, min_pool_size);
  p.si_negative = load_pool(dir / "si_negative.txt", true, min_pool_size);
  p.filler = load_pool(dir / "filler.txt", false, min_pool_size);
  p.drugs = {"acetaminophen", "aspirin", "ibuprofen", "lorazepam", "sertraline",
             "quetiapine",    "oxycodone", "trazodone", "amitriptyline", "clonazepam"};
  return p;
}

std::filesystem::path default_template_dir() { return SCANER_TEMPLATE_DIR; }

std::string render(const std::string& text, const Persona& persona, const std::string& drug) {
  std::string out = text;
  replace_all(out, "{Subj}", persona.female ? "She" : "He");
  replace_all(out, "{subj}", persona.female ? "she" : "he");
  replace_all(out, "{refl}", persona.female ? "herself" : "himself");
  replace_all(out, "{poss}", persona.female ? "her" : "his");
  replace_all(out, "{drug}", drug);
  return out;
}

}  // namespace scaner::synth
