#include "trex/formats.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "trex/errors.hpp"
#include "trex/util.hpp"

namespace trex {
namespace {

std::string decode_entities(std::string_view in) {
  std::string out;
  out.reserve(in.size());
  std::size_t i = 0;
  while (i < in.size()) {
    if (in[i] == '&') {
      auto end = in.find(';', i);
      if (end != std::string_view::npos && end - i <= 6) {
        std::string_view name = in.substr(i + 1, end - i - 1);
        char c = 0;
        if (name == "amp") c = '&';
        else if (name == "lt") c = '<';
        else if (name == "gt") c = '>';
        else if (name == "quot") c = '"';
        else if (name == "apos") c = '\'';
        if (c) {
          out += c;
          i = end + 1;
          continue;
        }
      }
    }
    out += in[i++];
  }
  return out;
}

struct Tag {
  std::string name;
  bool closing = false;
  bool self_closing = false;
  std::map<std::string, std::string> attrs;
  std::size_t end = 0;  // index just past '>'
};

// Parses the tag starting at in[pos] == '<'. Returns nullopt for stray '<'.
std::optional<Tag> parse_tag(std::string_view in, std::size_t pos) {
  Tag tag;
  std::size_t i = pos + 1;
  if (i < in.size() && in[i] == '/') {
    tag.closing = true;
    i++;
  }
  std::size_t name_start = i;
  while (i < in.size() && (std::isalnum(static_cast<unsigned char>(in[i])) || in[i] == '_')) i++;
  if (i == name_start) return std::nullopt;
  tag.name = std::string(in.substr(name_start, i - name_start));
  while (i < in.size() && in[i] != '>') {
    if (std::isspace(static_cast<unsigned char>(in[i]))) {
      i++;
      continue;
    }
    if (in[i] == '/') {
      tag.self_closing = true;
      i++;
      continue;
    }
    std::size_t key_start = i;
    while (i < in.size() && in[i] != '=' && in[i] != '>' && !std::isspace(static_cast<unsigned char>(in[i]))) i++;
    std::string key(in.substr(key_start, i - key_start));
    while (i < in.size() && std::isspace(static_cast<unsigned char>(in[i]))) i++;
    if (i < in.size() && in[i] == '=') {
      i++;
      while (i < in.size() && std::isspace(static_cast<unsigned char>(in[i]))) i++;
      if (i < in.size() && (in[i] == '"' || in[i] == '\'')) {
        char quote = in[i++];
        std::size_t val_start = i;
        while (i < in.size() && in[i] != quote) i++;
        tag.attrs[key] = decode_entities(in.substr(val_start, i - val_start));
        if (i < in.size()) i++;
      }
    } else if (!key.empty()) {
      tag.attrs[key] = "";
    }
  }
  if (i >= in.size()) return std::nullopt;
  tag.end = i + 1;
  return tag;
}

// Punctuation-driven splitter for files without <s> markup.
std::vector<CharSpan> split_sentences(const std::string& text) {
  std::vector<CharSpan> spans;
  std::size_t i = 0;
  auto is_space = [&](std::size_t k) { return std::isspace(static_cast<unsigned char>(text[k])); };
  while (i < text.size()) {
    while (i < text.size() && is_space(i)) i++;
    if (i >= text.size()) break;
    std::size_t start = i;
    std::size_t end = text.size();
    for (std::size_t k = i; k < text.size(); ++k) {
      char c = text[k];
      if (c == '.' || c == '!' || c == '?') {
        std::size_t stop = k + 1;
        while (stop < text.size() && (text[stop] == '"' || text[stop] == '\'' || text[stop] == ')')) stop++;
        if (stop >= text.size() || std::isspace(static_cast<unsigned char>(text[stop]))) {
          end = stop;
          break;
        }
      }
      if (c == '\n' && k + 1 < text.size() && text[k + 1] == '\n') {
        end = k;
        break;
      }
    }
    while (end > start && is_space(end - 1)) end--;
    spans.push_back({start, end});
    i = std::max(end, start + 1);
  }
  return spans;
}

std::optional<Rel> rel_from_timeml(std::string_view rel_type) {
  std::string key = to_lower(trim(rel_type));
  if (key == "before") return Rel::before;
  if (key == "after") return Rel::after;
  if (key == "includes" || key == "include") return Rel::include;
  if (key == "is_included" || key == "is included") return Rel::is_included;
  if (key == "simultaneous") return Rel::simultaneous;
  if (key == "equal") return Rel::equal;
  if (key == "vague") return Rel::vague;
  return std::nullopt;
}

std::optional<Rel> rel_from_tdd_code(std::string_view code) {
  std::string key = to_lower(trim(code));
  if (key == "b") return Rel::before;
  if (key == "a") return Rel::after;
  if (key == "i") return Rel::include;
  if (key == "ii") return Rel::is_included;
  if (key == "s") return Rel::simultaneous;
  if (key == "v") return Rel::vague;
  return rel_from_name(key);
}

struct ParsedTimeml {
  Document doc;
  std::map<std::string, std::string> instance_to_event;  // eiid -> eid
  TimemlLinks links;
};

ParsedTimeml parse_timeml(const std::filesystem::path& path) {
  std::string raw = read_file(path);
  ParsedTimeml parsed;
  Document& doc = parsed.doc;
  doc.doc_id = path.stem().string();

  auto docid_open = raw.find("<DOCID>");
  if (docid_open != std::string::npos) {
    auto docid_close = raw.find("</DOCID>", docid_open);
    if (docid_close != std::string::npos) {
      doc.doc_id = trim(raw.substr(docid_open + 7, docid_close - docid_open - 7));
    }
  }

  auto text_open = raw.find("<TEXT>");
  auto text_close = raw.find("</TEXT>");
  if (text_open == std::string::npos || text_close == std::string::npos || text_close < text_open) {
    throw LoadError("no <TEXT> element in " + path.string());
  }
  std::string_view body(raw.data() + text_open + 6, text_close - text_open - 6);

  struct OpenEvent {
    std::string eid;
    std::size_t start;
  };
  std::optional<OpenEvent> open_event;
  std::optional<std::size_t> open_sentence;
  bool saw_sentence_tags = false;

  std::size_t i = 0;
  while (i < body.size()) {
    if (body[i] == '<') {
      auto tag = parse_tag(body, i);
      if (tag) {
        if (tag->name == "EVENT") {
          if (!tag->closing) {
            open_event = OpenEvent{tag->attrs.count("eid") ? tag->attrs["eid"] : "", doc.text.size()};
          } else if (open_event) {
            EventTrigger t;
            t.id = open_event->eid;
            t.span = {open_event->start, doc.text.size()};
            t.surface = doc.text.substr(t.span.begin, t.span.end - t.span.begin);
            if (t.id.empty()) {
              throw LoadError("EVENT without eid in " + path.string());
            }
            doc.triggers.push_back(std::move(t));
            open_event.reset();
          }
        } else if (tag->name == "s") {
          saw_sentence_tags = true;
          if (!tag->closing) {
            open_sentence = doc.text.size();
          } else if (open_sentence) {
            doc.sentence_spans.push_back({*open_sentence, doc.text.size()});
            open_sentence.reset();
          }
        }
        // other markup (TIMEX3, SIGNAL, ...) contributes only its inner text
        i = tag->end;
        continue;
      }
    }
    if (body[i] == '&') {
      auto end = body.find(';', i);
      if (end != std::string_view::npos && end - i <= 6) {
        doc.text += decode_entities(body.substr(i, end - i + 1));
        i = end + 1;
        continue;
      }
    }
    doc.text += body[i++];
  }

  if (!saw_sentence_tags) {
    doc.sentence_spans = split_sentences(doc.text);
  }

  for (auto& t : doc.triggers) {
    for (std::size_t k = 0; k < doc.sentence_spans.size(); ++k) {
      const auto& s = doc.sentence_spans[k];
      if (t.span.begin >= s.begin && t.span.end <= s.end) {
        t.sentence_index = static_cast<int>(k);
        break;
      }
    }
    if (t.sentence_index < 0) {
      throw LoadError("trigger " + t.id + " outside every sentence in " + path.string());
    }
  }

  // instance and link elements may appear anywhere in the file
  i = 0;
  while ((i = raw.find('<', i)) != std::string::npos) {
    auto tag = parse_tag(raw, i);
    if (!tag) {
      i++;
      continue;
    }
    if (tag->name == "MAKEINSTANCE" && !tag->closing) {
      auto eiid = tag->attrs.find("eiid");
      auto event_id = tag->attrs.find("eventID");
      if (eiid != tag->attrs.end() && event_id != tag->attrs.end()) {
        parsed.instance_to_event[eiid->second] = event_id->second;
      }
    } else if (tag->name == "TLINK" && !tag->closing) {
      auto pick = [&](const char* a, const char* b) -> std::string {
        auto it = tag->attrs.find(a);
        if (it != tag->attrs.end()) return it->second;
        it = tag->attrs.find(b);
        return it != tag->attrs.end() ? it->second : "";
      };
      std::string source = pick("eventInstanceID", "eventID");
      std::string target = pick("relatedToEventInstance", "relatedToEvent");
      std::string rel_type = tag->attrs.count("relType") ? tag->attrs["relType"] : "";
      if (!source.empty() && !target.empty()) {
        if (to_lower(rel_type) == "identity") {
          parsed.links.identity_links.emplace_back(source, target);
        } else {
          parsed.links.event_links.push_back({source, target, rel_type});
        }
      }
    }
    i = tag->end;
  }
  return parsed;
}

std::string resolve_event_ref(const ParsedTimeml& parsed, const std::string& ref) {
  auto it = parsed.instance_to_event.find(ref);
  if (it != parsed.instance_to_event.end()) return it->second;
  return ref;
}

struct TsvRow {
  std::string doc_id, e1, e2, label;
  std::size_t line_no;
};

std::vector<TsvRow> read_pair_tsv(const std::filesystem::path& path) {
  std::vector<TsvRow> rows;
  std::size_t line_no = 0;
  for (const auto& line : split(read_file(path), '\n')) {
    line_no++;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto cols = split(line, '\t');
    if (cols.size() != 4) {
      throw LoadError(path.string() + ":" + std::to_string(line_no) + ": expected 4 tab-separated columns, got " +
                      std::to_string(cols.size()));
    }
    rows.push_back({trim(cols[0]), trim(cols[1]), trim(cols[2]), trim(cols[3]), line_no});
  }
  return rows;
}

Corpus load_pair_tsv(const std::filesystem::path& pairs_path, const RelationSchema& schema,
                     const std::filesystem::path& timeml_dir, bool tdd_codes) {
  if (timeml_dir.empty()) {
    throw ConfigError("this format needs --docs pointing at the TimeML document directory");
  }
  Corpus corpus;
  corpus.dataset_name = schema.dataset_name;
  corpus.schema = schema;
  std::map<std::string, ParsedTimeml> parsed_docs;
  for (const auto& row : read_pair_tsv(pairs_path)) {
    auto it = parsed_docs.find(row.doc_id);
    if (it == parsed_docs.end()) {
      auto tml = timeml_dir / (row.doc_id + ".tml");
      if (!std::filesystem::exists(tml)) {
        throw LoadError(pairs_path.string() + ":" + std::to_string(row.line_no) +
                        ": no TimeML document for " + row.doc_id + " (expected " + tml.string() + ")");
      }
      it = parsed_docs.emplace(row.doc_id, parse_timeml(tml)).first;
      it->second.doc.doc_id = row.doc_id;
      for (const auto& link : it->second.links.identity_links) {
        std::string a = resolve_event_ref(it->second, link.first);
        std::string b = resolve_event_ref(it->second, link.second);
        if (it->second.doc.find_trigger(a) && it->second.doc.find_trigger(b) && a != b) {
          it->second.doc.coreferent.emplace_back(a, b);
        }
      }
      corpus.documents[row.doc_id] = it->second.doc;
    }
    auto label = tdd_codes ? rel_from_tdd_code(row.label) : rel_from_name(row.label);
    if (!label) {
      throw LoadError(pairs_path.string() + ":" + std::to_string(row.line_no) + ": unknown label \"" +
                      row.label + "\"");
    }
    std::string e1 = resolve_event_ref(it->second, row.e1);
    std::string e2 = resolve_event_ref(it->second, row.e2);
    for (const auto& id : {e1, e2}) {
      if (!it->second.doc.find_trigger(id)) {
        throw LoadError(pairs_path.string() + ":" + std::to_string(row.line_no) + ": trigger " + id +
                        " not found in document " + row.doc_id);
      }
    }
    corpus.pairs.push_back({row.doc_id, e1, e2, *label});
  }
  corpus.validate();
  return corpus;
}

}  // namespace

Document parse_timeml_file(const std::filesystem::path& path) {
  auto parsed = parse_timeml(path);
  parsed.doc.validate();
  return parsed.doc;
}

TimemlLinks parse_timeml_links(const std::filesystem::path& path) {
  auto parsed = parse_timeml(path);
  TimemlLinks links;
  for (const auto& link : parsed.links.event_links) {
    links.event_links.push_back(
        {resolve_event_ref(parsed, link[0]), resolve_event_ref(parsed, link[1]), link[2]});
  }
  for (const auto& link : parsed.links.identity_links) {
    links.identity_links.emplace_back(resolve_event_ref(parsed, link.first),
                                      resolve_event_ref(parsed, link.second));
  }
  return links;
}

Corpus load_matres_tsv(const std::filesystem::path& pairs_path, const RelationSchema& schema,
                       const std::filesystem::path& timeml_dir) {
  return load_pair_tsv(pairs_path, schema, timeml_dir, false);
}

Corpus load_tdd_tsv(const std::filesystem::path& pairs_path, const RelationSchema& schema,
                    const std::filesystem::path& timeml_dir) {
  return load_pair_tsv(pairs_path, schema, timeml_dir, true);
}

Corpus load_timeml_dir(const std::filesystem::path& dir, const RelationSchema& schema) {
  if (!std::filesystem::is_directory(dir)) {
    throw LoadError("not a directory: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() == ".tml") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw LoadError("no .tml files under " + dir.string());

  Corpus corpus;
  corpus.dataset_name = schema.dataset_name;
  corpus.schema = schema;
  std::set<Rel> gold(schema.labels.begin(), schema.labels.end());
  for (const auto& file : files) {
    auto parsed = parse_timeml(file);
    for (const auto& link : parsed.links.identity_links) {
      std::string a = resolve_event_ref(parsed, link.first);
      std::string b = resolve_event_ref(parsed, link.second);
      if (parsed.doc.find_trigger(a) && parsed.doc.find_trigger(b) && a != b) {
        parsed.doc.coreferent.emplace_back(a, b);
      }
    }
    for (const auto& link : parsed.links.event_links) {
      auto rel = rel_from_timeml(link[2]);
      // relTypes outside the dataset's gold set (IBEFORE, BEGINS, ...) are
      // not scoreable under this schema and are skipped
      if (!rel || !gold.count(*rel)) continue;
      std::string e1 = resolve_event_ref(parsed, link[0]);
      std::string e2 = resolve_event_ref(parsed, link[1]);
      if (!parsed.doc.find_trigger(e1) || !parsed.doc.find_trigger(e2) || e1 == e2) continue;
      corpus.pairs.push_back({parsed.doc.doc_id, e1, e2, *rel});
    }
    if (corpus.documents.count(parsed.doc.doc_id)) {
      throw LoadError("duplicate doc id " + parsed.doc.doc_id + " from " + file.string());
    }
    corpus.documents[parsed.doc.doc_id] = std::move(parsed.doc);
  }
  corpus.validate();
  return corpus;
}

}  // namespace trex
