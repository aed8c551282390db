#include "longwrite/templates.hpp"

#include "longwrite/error.hpp"
#include "longwrite/text.hpp"

namespace longwrite::templates {

std::string render_template(std::string_view tmpl, const SlotValues& values) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    std::size_t open = tmpl.find("{{", pos);
    if (open == std::string_view::npos) {
      out.append(tmpl.substr(pos));
      break;
    }
    std::size_t close = tmpl.find("}}", open + 2);
    if (close == std::string_view::npos) {
      out.append(tmpl.substr(pos));
      break;
    }
    out.append(tmpl.substr(pos, open - pos));
    std::string_view name = trim(tmpl.substr(open + 2, close - open - 2));
    bool filled = false;
    for (const auto& [slot, value] : values) {
      if (slot == name) {
        out.append(value);
        filled = true;
        break;
      }
    }
    if (!filled) throw InvalidInput("template slot '" + std::string(name) + "' has no value");
    pos = close + 2;
  }
  return out;
}

TagBlock find_tag_block(std::string_view text, std::string_view tag, std::size_t from) {
  std::string open = "<" + std::string(tag) + ">\n";
  std::string close = "\n</" + std::string(tag) + ">";
  std::size_t begin = text.find(open, from);
  if (begin == std::string_view::npos) return {};
  begin += open.size();
  std::size_t end = text.find(close, begin);
  // An empty slot renders as "<tag>\n\n</tag>": the content is empty and the
  // closing newline is the one we already consumed.
  if (end == std::string_view::npos) {
    std::string bare_close = "</" + std::string(tag) + ">";
    if (text.substr(begin).starts_with(bare_close)) return {true, begin, begin};
    return {};
  }
  return {true, begin, end};
}

}  // namespace longwrite::templates
