#pragma once

#include "coref_meter/errors.hpp"
#include "coref_meter/types.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace corefmeter {

enum class PartitionSource { Gold, Predicted };

// ---------------------------------------------------------------------------
// CoNLL-2012 coreference files
//
// Token rows are whitespace-separated; column 0 is the document name, 1 the
// part number, 3 the word, 9 the speaker (when there are at least 11
// columns) and the last column the bracketed coreference annotation, e.g.
// `(12`, `12)`, `(12)`, `(3|(12)`, or `-`. Documents are delimited by
// `#begin document (name); part NNN` and `#end document`; sentences by blank
// lines. Document ids are `name:part`.
// ---------------------------------------------------------------------------

/// Parses a CoNLL-2012 file. The coreference column fills `gold` or
/// `predicted` depending on `source`. Singletons are kept.
std::vector<Document> parse_conll_coref(const std::filesystem::path& path, PartitionSource source,
                                        Diagnostics* diag = nullptr);
std::vector<Document> parse_conll_coref(std::istream& in, const std::string& name, PartitionSource source,
                                        Diagnostics* diag = nullptr);

/// Writes documents in a minimal 12-column CoNLL-2012 layout.
void write_conll_coref(std::ostream& out, const std::vector<Document>& docs, PartitionSource source);

// ---------------------------------------------------------------------------
// JSON-lines documents: one object per line with `doc_id`, `sentences`
// (array of token arrays) or `tokens` (flat, no sentence boundaries),
// optional `speakers` (same shape as the tokens), `genre`, `clusters` and
// `predicted_clusters` (arrays of [start, end] pairs, inclusive, global).
// A cluster element given as an array of several pairs is a discontinuous
// mention; it is rejected with a counted warning.
// ---------------------------------------------------------------------------

std::vector<Document> parse_document_jsonl(const std::filesystem::path& path, Diagnostics* diag = nullptr);
std::vector<Document> parse_document_jsonl(std::istream& in, const std::string& name, Diagnostics* diag = nullptr);
void write_document_jsonl(std::ostream& out, const std::vector<Document>& docs);

/// Dispatches on extension: `.jsonl`/`.json` -> JSON lines, otherwise CoNLL-2012.
/// For JSON lines, `source` selects which cluster field is primary: with
/// Predicted, `clusters` is read into `predicted`.
std::vector<Document> load_documents(const std::filesystem::path& path, PartitionSource source,
                                     Diagnostics* diag = nullptr);

/// Copies the partitions of `predictions` into docs[i].predicted, matching by
/// doc_id. Missing or extra documents and token-count mismatches are
/// InputErrors.
void merge_predictions(std::vector<Document>& docs, const std::vector<Document>& predictions);

// ---------------------------------------------------------------------------
// CoNLL-U
// ---------------------------------------------------------------------------

/// One tree per sentence. Multiword-token (`1-2`) and empty-node (`1.1`)
/// lines are skipped. Out-of-range heads, cycles and root counts other than
/// one are parse errors.
std::vector<DependencyTree> parse_conllu(const std::filesystem::path& path);
std::vector<DependencyTree> parse_conllu(std::istream& in, const std::string& name);
void write_conllu(std::ostream& out, const std::vector<DependencyTree>& trees);

/// Checks a single tree; throws ParseError anchored at `line` of `file`.
void validate_tree(const DependencyTree& tree, const std::string& file, std::size_t line);

/// Assigns trees to documents sentence by sentence, in order. Tokenization
/// must be identical (same sentence lengths, same forms); anything else is an
/// InputError.
void attach_dependencies(std::vector<Document>& docs, const std::vector<DependencyTree>& trees);

/// Reads a whole file; throws InputError naming the path when it cannot be opened.
std::string read_file(const std::filesystem::path& path);

}  // namespace corefmeter
