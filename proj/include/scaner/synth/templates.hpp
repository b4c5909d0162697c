#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "scaner/common/labels.hpp"

namespace scaner::synth {

struct Template {
  std::string text;  // with {Subj}/{subj}/{refl}/{poss}/{drug} slots
  std::optional<SaMethod> method;
};

// Evidence and filler sentences used to assemble synthetic notes.
struct TemplatePools {
  std::vector<Template> sa_positive;
  std::vector<Template> sa_negative;
  std::vector<Template> sa_unsure;
  std::vector<Template> si_positive;
  std::vector<Template> si_negative;
  std::vector<Template> filler;
  std::vector<std::string> drugs;

  // Reads sa_positive.txt, ..., filler.txt from `dir`. Throws DataError on a
  // missing file, a malformed line or a pool with fewer than `min_pool_size`
  // templates.
  static TemplatePools load(const std::filesystem::path& dir, std::size_t min_pool_size = 10);
};

// Directory of the template files shipped with the source tree.
std::filesystem::path default_template_dir();

struct Persona {
  bool female = false;
};

// Fills the slots of `text`. `drug` is used for {drug}.
std::string render(const std::string& text, const Persona& persona, const std::string& drug);

}  // namespace scaner::synth
