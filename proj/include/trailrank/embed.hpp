#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace trailrank {

/// Dense embedding. Components are stored at float32 precision (the cache
/// precision) so persisted vectors reload bit-identically.
struct EmbeddingVector {
    std::vector<double> values;
    /// Set when the source text was empty; `values` is then all zeros.
    bool empty_text = false;

    std::size_t dimension() const noexcept { return values.size(); }
    double norm() const noexcept;
};

enum class ProviderKind : std::uint8_t { Reference, Remote };

struct ProviderSpec {
    ProviderKind kind = ProviderKind::Reference;
    int dimension = 256;
    std::string endpoint;    // remote only, e.g. http://127.0.0.1:8080/embed
    std::string model_name;  // remote only
    int max_tokens = 384;
    int batch_size = 64;
    double timeout_seconds = 30.0;
    int retries = 2;

    void validate() const;
    /// Name used to key the cache; the reference embedder is versioned by dimension.
    std::string cache_model_name() const;
};

struct RankedEntry {
    std::string route_id;
    double score = 0.0;
};

struct RankedList {
    std::string query_id;
    std::vector<RankedEntry> entries;
};

struct Document {
    std::string route_id;
    EmbeddingVector vector;
};

/// Lexical hashing embedder.
///
/// The text is lower-cased (ASCII) and split into overlapping byte trigrams;
/// texts shorter than three bytes form a single gram. Each gram is hashed with
/// h = mix64(fnv1a64(gram)); it adds +1 to bucket h % dimension when bit 63 of
/// h is clear and -1 otherwise. The counts are L2-normalised in double
/// precision and rounded to float32. Empty text yields the zero vector with
/// `empty_text` set.
EmbeddingVector reference_embed(std::string_view text, int dimension);

/// Clamped to [-1, 1]. Throws DimensionMismatch or ZeroVector.
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

double dot(const EmbeddingVector& a, const EmbeddingVector& b);

/// Rounds every component to float32 after L2 normalisation. Zero vectors are
/// returned unchanged.
EmbeddingVector normalized(std::vector<double> values);

/// Exact ranking of every document by cosine similarity, descending, ties by
/// ascending route_id. Documents with a zero vector score 0.
RankedList rank_documents(std::string query_id, const EmbeddingVector& query, std::span<const Document> docs,
                          int jobs = 1);

using ContentHash = std::array<std::uint8_t, 16>;

/// 128-bit FNV-1a over model_name, a NUL byte, then the text.
ContentHash content_hash(std::string_view model_name, std::string_view text) noexcept;

struct ContentHashHasher {
    std::size_t operator()(const ContentHash& h) const noexcept;
};

/// Embedding cache: in memory, optionally backed by an append-only file of
/// the form "TRV1" followed by records (16-byte hash, u32 LE dimension,
/// dimension x f32 LE). A torn trailing record is dropped on load.
/// Concurrent readers are allowed alongside a single writer.
class EmbeddingCache {
public:
    EmbeddingCache() = default;
    explicit EmbeddingCache(std::filesystem::path path);

    std::optional<EmbeddingVector> find(const ContentHash& key) const;
    void insert(const ContentHash& key, const EmbeddingVector& vec);
    std::size_t size() const;
    const std::optional<std::filesystem::path>& path() const noexcept { return path_; }

private:
    void load();

    std::optional<std::filesystem::path> path_;
    mutable std::shared_mutex mutex_;
    std::unordered_map<ContentHash, std::vector<float>, ContentHashHasher> entries_;
};

/// Calls the remote embedding service for texts missing from `cache`, in
/// batches of provider.batch_size. Request: POST {"model": ..., "texts": [...]}.
/// Response: {"vectors": [[...], ...]}, one row per text in order.
/// Throws TransportError, MalformedResponse, or DimensionMismatch.
std::vector<EmbeddingVector> remote_embed(const ProviderSpec& provider, std::span<const std::string> texts,
                                          EmbeddingCache& cache);

/// Provider-agnostic entry point; reference vectors are cached too.
std::vector<EmbeddingVector> embed_texts(const ProviderSpec& provider, std::span<const std::string> texts,
                                         EmbeddingCache& cache);

/// Logs a warning for every text whose estimated token count exceeds the limit;
/// returns how many did.
std::size_t warn_token_budget(std::span<const std::string> texts, int max_tokens);

}  // namespace trailrank
