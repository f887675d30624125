#include "ipikit/injector.hpp"

#include <cctype>

#include "ipikit/util.hpp"

namespace ipikit {

const char* insertion_point_name(InsertionPoint point) {
  switch (point) {
    case InsertionPoint::HeadMeta: return "head_meta";
    case InsertionPoint::BodyTop: return "body_top";
    case InsertionPoint::BodyInline: return "body_inline";
    case InsertionPoint::Sidebar: return "sidebar";
    case InsertionPoint::Footer: return "footer";
    case InsertionPoint::ScriptComment: return "script_comment";
  }
  return "?";
}

std::optional<InsertionPoint> parse_insertion_point(std::string_view name) {
  for (InsertionPoint p : kAllInsertionPoints) {
    if (name == insertion_point_name(p)) return p;
  }
  return std::nullopt;
}

std::string insertion_choice_name(const InsertionChoice& choice) {
  return choice.random ? "random" : insertion_point_name(choice.fixed);
}

std::optional<InsertionChoice> parse_insertion_choice(std::string_view name) {
  if (name == "random") return InsertionChoice{true, InsertionPoint::BodyInline};
  if (auto p = parse_insertion_point(name)) return InsertionChoice{false, *p};
  return std::nullopt;
}

InsertionPoint resolve_insertion_point(const InsertionChoice& choice, Rng& rng) {
  if (!choice.random) return choice.fixed;
  return kAllInsertionPoints[bounded_draw(rng, kAllInsertionPoints.size())];
}

std::string applied_point_name(const std::optional<InsertionPoint>& applied) {
  return applied ? insertion_point_name(*applied) : "document_append";
}

namespace {

bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '-' || c == ':';
}

struct TagToken {
  size_t begin = 0;  // position of '<'
  size_t end = 0;    // position just past '>'
  bool closing = false;
  std::string name;  // lowercased
};

// Returns the next element tag at or after `pos`. Comment regions
// (<!-- -->), declarations (<!...>) and processing instructions (<?...>)
// are skipped; '>' inside quoted attribute values does not end a tag.
std::optional<TagToken> next_tag(std::string_view html, size_t pos) {
  while (pos < html.size()) {
    pos = html.find('<', pos);
    if (pos == std::string_view::npos) return std::nullopt;
    if (html.compare(pos, 4, "<!--") == 0) {
      size_t close = html.find("-->", pos + 4);
      if (close == std::string_view::npos) return std::nullopt;  // unterminated comment
      pos = close + 3;
      continue;
    }
    if (pos + 1 >= html.size()) return std::nullopt;
    char c = html[pos + 1];
    if (c == '!' || c == '?') {
      size_t close = html.find('>', pos + 1);
      if (close == std::string_view::npos) return std::nullopt;
      pos = close + 1;
      continue;
    }
    bool closing = c == '/';
    size_t name_start = pos + (closing ? 2 : 1);
    if (name_start >= html.size() ||
        std::isalpha(static_cast<unsigned char>(html[name_start])) == 0) {
      ++pos;  // stray '<'
      continue;
    }
    size_t name_end = name_start;
    while (name_end < html.size() && is_name_char(html[name_end])) ++name_end;

    size_t scan = name_end;
    char quote = 0;
    while (scan < html.size()) {
      char ch = html[scan];
      if (quote != 0) {
        if (ch == quote) quote = 0;
      } else if (ch == '"' || ch == '\'') {
        quote = ch;
      } else if (ch == '>') {
        break;
      }
      ++scan;
    }
    if (scan >= html.size()) return std::nullopt;  // unterminated tag

    TagToken token;
    token.begin = pos;
    token.end = scan + 1;
    token.closing = closing;
    token.name = to_lower(html.substr(name_start, name_end - name_start));
    return token;
  }
  return std::nullopt;
}

std::optional<TagToken> find_tag(std::string_view html, std::string_view name, bool closing) {
  size_t pos = 0;
  while (auto token = next_tag(html, pos)) {
    if (token->closing == closing && token->name == name) return token;
    pos = token->end;
  }
  return std::nullopt;
}

// Position just past the '>' of the first <name ...> open tag.
std::optional<size_t> after_open(std::string_view html, std::string_view name) {
  if (auto token = find_tag(html, name, false)) return token->end;
  return std::nullopt;
}

// Position of the '<' of the first </name> close tag.
std::optional<size_t> before_close(std::string_view html, std::string_view name) {
  if (auto token = find_tag(html, name, true)) return token->begin;
  return std::nullopt;
}

// Position just past the '>' of the first </name> close tag.
std::optional<size_t> after_close(std::string_view html, std::string_view name) {
  if (auto token = find_tag(html, name, true)) return token->end;
  return std::nullopt;
}

size_t count_occurrences(std::string_view text, std::string_view needle) {
  if (needle.empty()) return 0;
  size_t count = 0;
  size_t pos = 0;
  while ((pos = text.find(needle, pos)) != std::string_view::npos) {
    ++count;
    pos += needle.size();
  }
  return count;
}

}  // namespace

std::string script_comment_form(std::string_view payload, bool* altered) {
  std::string escaped = replace_all(payload, "*/", "*\\/");
  if (altered != nullptr && escaped != payload) *altered = true;
  return "/* " + escaped + " */";
}

std::string script_element_form(std::string_view payload, bool* altered) {
  return "<script>" + script_comment_form(payload, altered) + "</script>";
}

InjectionResult inject(std::string_view html, const WrappedBlock& block, InsertionPoint point) {
  InjectionResult result;
  result.requested_point = point;
  result.altered = block.altered;

  auto splice = [&](size_t pos, std::string_view text,
                    std::optional<InsertionPoint> applied) -> InjectionResult& {
    result.document.reserve(html.size() + text.size());
    result.document.assign(html.substr(0, pos));
    result.document.append(text);
    result.document.append(html.substr(pos));
    result.applied_point = applied;
    result.fallback_used = applied != point;
    result.inserted_text = std::string(text);
    return result;
  };

  switch (point) {
    case InsertionPoint::HeadMeta:
      if (auto pos = before_close(html, "head"))
        return splice(*pos, block.text, InsertionPoint::HeadMeta);
      break;
    case InsertionPoint::BodyTop:
      if (auto pos = after_open(html, "body"))
        return splice(*pos, block.text, InsertionPoint::BodyTop);
      break;
    case InsertionPoint::BodyInline:
      if (auto pos = after_close(html, "p"))
        return splice(*pos, block.text, InsertionPoint::BodyInline);
      if (auto pos = after_open(html, "body"))
        return splice(*pos, block.text, InsertionPoint::BodyTop);
      break;
    case InsertionPoint::Sidebar:
      if (auto pos = before_close(html, "aside"))
        return splice(*pos, block.text, InsertionPoint::Sidebar);
      if (auto pos = before_close(html, "nav"))
        return splice(*pos, block.text, InsertionPoint::Sidebar);
      if (auto pos = before_close(html, "body"))
        return splice(*pos, block.text, InsertionPoint::Footer);
      break;
    case InsertionPoint::Footer:
      if (auto pos = before_close(html, "body"))
        return splice(*pos, block.text, InsertionPoint::Footer);
      break;
    case InsertionPoint::ScriptComment: {
      bool script_altered = false;
      std::string comment = script_comment_form(block.payload, &script_altered);
      if (auto pos = after_open(html, "script")) {
        result.altered = block.altered || script_altered;
        return splice(*pos, comment, InsertionPoint::ScriptComment);
      }
      result.altered = block.altered || script_altered;
      return splice(html.size(), "<script>" + comment + "</script>", std::nullopt);
    }
  }

  return splice(html.size(), block.text, std::nullopt);
}

std::string strip_block(std::string_view document, const WrappedBlock& block) {
  auto remove_at = [&](size_t pos, size_t len) {
    std::string out(document.substr(0, pos));
    out.append(document.substr(pos + len));
    return out;
  };

  size_t text_count = count_occurrences(document, block.text);
  if (text_count > 1) {
    throw Error("strip_block: block text occurs " + std::to_string(text_count) + " times");
  }
  if (text_count == 1) {
    return remove_at(document.find(block.text), block.text.size());
  }

  // script_comment injections: the removal target is the JS-comment form,
  // or the whole appended <script> element for the terminal fallback.
  std::string comment = script_comment_form(block.payload);
  std::string element = script_element_form(block.payload);
  size_t comment_count = count_occurrences(document, comment);
  if (comment_count > 1) {
    throw Error("strip_block: script comment form occurs " + std::to_string(comment_count) +
                " times");
  }
  if (comment_count == 1) {
    size_t element_pos = document.find(element);
    bool appended = element_pos != std::string_view::npos &&
                    element_pos + element.size() == document.size();
    if (appended) return remove_at(element_pos, element.size());
    return remove_at(document.find(comment), comment.size());
  }

  throw Error("strip_block: block not found in document");
}

}  // namespace ipikit
