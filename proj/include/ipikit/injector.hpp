#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "ipikit/embedding.hpp"

namespace ipikit {

enum class InsertionPoint { HeadMeta, BodyTop, BodyInline, Sidebar, Footer, ScriptComment };

inline constexpr std::array<InsertionPoint, 6> kAllInsertionPoints = {
    InsertionPoint::HeadMeta, InsertionPoint::BodyTop,  InsertionPoint::BodyInline,
    InsertionPoint::Sidebar,  InsertionPoint::Footer,   InsertionPoint::ScriptComment};

const char* insertion_point_name(InsertionPoint point);
std::optional<InsertionPoint> parse_insertion_point(std::string_view name);

/// Insertion point as configured: a fixed point or "random".
struct InsertionChoice {
  bool random = false;
  InsertionPoint fixed = InsertionPoint::BodyInline;

  bool operator==(const InsertionChoice&) const = default;
};

std::string insertion_choice_name(const InsertionChoice& choice);
std::optional<InsertionChoice> parse_insertion_choice(std::string_view name);

InsertionPoint resolve_insertion_point(const InsertionChoice& choice, Rng& rng);

struct InjectionResult {
  std::string document;
  InsertionPoint requested_point = InsertionPoint::BodyInline;
  /// nullopt means the terminal document-append fallback was used.
  std::optional<InsertionPoint> applied_point;
  bool fallback_used = false;
  /// block.altered, additionally set by the script-comment `*/` rewrite.
  bool altered = false;
  /// The exact text spliced into the document.
  std::string inserted_text;
};

/// "document_append" for the terminal fallback, the point name otherwise.
std::string applied_point_name(const std::optional<InsertionPoint>& applied);

/// Splices exactly one copy of the block into the document. Anchors are
/// matched case-insensitively, tolerate attributes and intra-tag whitespace,
/// and are never matched inside <!-- --> comments. Total on text input:
/// every chain terminates in appending to the end of the document.
InjectionResult inject(std::string_view html, const WrappedBlock& block, InsertionPoint point);

/// Payload re-wrapped as a JS block comment, `*/` inside the payload
/// rewritten to `*\/`.
std::string script_comment_form(std::string_view payload, bool* altered = nullptr);
std::string script_element_form(std::string_view payload, bool* altered = nullptr);

/// Inverse of inject for documents modified by exactly one injection of this
/// block. Throws when the inserted text cannot be found or occurs more than
/// once.
std::string strip_block(std::string_view document, const WrappedBlock& block);

}  // namespace ipikit
