// Copyright 2026 The clinner Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CLINNER_INGEST_HPP
#define CLINNER_INGEST_HPP

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_set>
#include <vector>

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "clinner/error.hpp"
#include "clinner/text.hpp"

// Publication harvesting from a LitCOVID-style search endpoint.
//
// Wire schema (one page):
//   {"total": <int>, "results": [{"paper_id", "title", "abstract",
//                                 "language", "pub_type", "date"}, ...]}
// Records in the live LitCOVID shape (pmid, publication_types, ...) are
// mapped onto the same fields by adapt_litcovid_record().
//
// A base_url with the file:// scheme names a fixture directory holding
// page-<n>.json files (pages are 1-based); a missing page is an empty page.
namespace clinner {

using Date = std::chrono::year_month_day;

inline Date parse_date(std::string_view s) {
  auto bad = [&] { return Error(ErrorKind::InvalidArgument, "expected YYYY-MM-DD date, got '" + std::string(s) + "'"); };
  if (s.size() < 10 || s[4] != '-' || s[7] != '-') throw bad();
  auto num = [&](std::size_t pos, std::size_t len) {
    int v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
      if (!text::is_digit(s[i])) throw bad();
      v = v * 10 + (s[i] - '0');
    }
    return v;
  };
  Date d{std::chrono::year{num(0, 4)}, std::chrono::month{static_cast<unsigned>(num(5, 2))},
         std::chrono::day{static_cast<unsigned>(num(8, 2))}};
  if (!d.ok()) throw bad();
  return d;
}

inline std::string format_date(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()), static_cast<unsigned>(d.month()),
                static_cast<unsigned>(d.day()));
  return buf;
}

struct HarvestQuery {
  std::string base_url;
  std::string query = "covid-19 case report";
  Date date_from = parse_date("2022-03-01");
  Date date_to = parse_date("2022-06-30");
  std::size_t page_size = 100;
  bool english_only = true;
  bool exclude_preprints = true;

  void validate() const {
    if (base_url.empty()) throw Error(ErrorKind::InvalidArgument, "base_url is empty");
    if (page_size < 1) throw Error(ErrorKind::InvalidArgument, "page_size must be at least 1");
    if (date_to < date_from) throw Error(ErrorKind::InvalidArgument, "date_from is after date_to");
  }
};

struct PublicationRecord {
  std::string paper_id;
  std::string title;
  std::string abstract_text;
  std::string language;
  std::string pub_type;
  Date date{};

  friend bool operator==(const PublicationRecord&, const PublicationRecord&) = default;
};

/// Publication types dropped by `exclude_preprints`: grey literature,
/// preprints and clinical trials.
inline const std::vector<std::string>& excluded_pub_types() {
  static const std::vector<std::string> types{"preprint", "grey literature", "gray literature", "clinical trial"};
  return types;
}

inline bool is_english(std::string_view language) {
  auto l = text::to_lower(text::trim(language));
  return l == "en" || l == "eng" || l == "english";
}

/// `pub_type` may list several types separated by ';'.
inline bool is_excluded_pub_type(std::string_view pub_type) {
  std::string_view rest = pub_type;
  while (true) {
    auto pos = rest.find(';');
    auto item = text::to_lower(text::collapse_whitespace(rest.substr(0, pos)));
    std::replace(item.begin(), item.end(), '_', ' ');
    for (const auto& ex : excluded_pub_types()) {
      if (item == ex) return true;
    }
    if (pos == std::string_view::npos) return false;
    rest.remove_prefix(pos + 1);
  }
}

namespace detail {

inline std::string json_string(const nlohmann::json& j, std::initializer_list<const char*> keys) {
  for (const char* key : keys) {
    if (!j.contains(key) || j[key].is_null()) continue;
    const auto& v = j[key];
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_array()) {
      std::string joined;
      for (const auto& item : v) {
        if (!item.is_string()) continue;
        if (!joined.empty()) joined += "; ";
        joined += item.get<std::string>();
      }
      return joined;
    }
    throw Error(ErrorKind::MalformedResponse, std::string("field '") + key + "' has an unexpected type");
  }
  return {};
}

}  // namespace detail

/// Maps a live LitCOVID search hit (pmid/_id, publication_types, ...) onto
/// the record fields.
inline PublicationRecord adapt_litcovid_record(const nlohmann::json& j) {
  PublicationRecord r;
  r.paper_id = detail::json_string(j, {"pmid", "_id", "id"});
  r.title = detail::json_string(j, {"title", "title_e"});
  r.abstract_text = detail::json_string(j, {"abstract", "abstract_e"});
  r.language = detail::json_string(j, {"language", "lang"});
  r.pub_type = detail::json_string(j, {"publication_types", "pub_types", "pub_type"});
  auto date = detail::json_string(j, {"date", "pub_date"});
  if (r.paper_id.empty() || date.empty()) throw Error(ErrorKind::MalformedResponse, "record lacks id or date");
  try {
    r.date = parse_date(date);
  } catch (const Error&) {
    throw Error(ErrorKind::MalformedResponse, "bad date '" + date + "'");
  }
  return r;
}

inline PublicationRecord parse_record(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorKind::MalformedResponse, "result entry is not an object");
  if (!j.contains("paper_id")) return adapt_litcovid_record(j);
  PublicationRecord r;
  r.paper_id = detail::json_string(j, {"paper_id"});
  r.title = detail::json_string(j, {"title"});
  r.abstract_text = detail::json_string(j, {"abstract"});
  r.language = detail::json_string(j, {"language"});
  r.pub_type = detail::json_string(j, {"pub_type"});
  auto date = detail::json_string(j, {"date"});
  if (r.paper_id.empty() || date.empty()) throw Error(ErrorKind::MalformedResponse, "record lacks paper_id or date");
  try {
    r.date = parse_date(date);
  } catch (const Error&) {
    throw Error(ErrorKind::MalformedResponse, "bad date '" + date + "'");
  }
  return r;
}

inline std::vector<PublicationRecord> parse_page(std::string_view body) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::MalformedResponse, e.what());
  }
  if (!j.is_object() || !j.contains("results") || !j["results"].is_array()) {
    throw Error(ErrorKind::MalformedResponse, "response lacks a 'results' array");
  }
  std::vector<PublicationRecord> out;
  for (const auto& item : j["results"]) out.push_back(parse_record(item));
  return out;
}

/// Monotonic time source; tests substitute FakeClock so that rate limiting
/// and retry backoff run instantly.
class Clock {
 public:
  using duration = std::chrono::nanoseconds;
  virtual ~Clock() = default;
  virtual duration now() = 0;
  virtual void sleep_until(duration t) = 0;
};

class SystemClock : public Clock {
 public:
  duration now() override {
    return std::chrono::duration_cast<duration>(std::chrono::steady_clock::now().time_since_epoch());
  }
  void sleep_until(duration t) override {
    auto d = t - now();
    if (d > duration::zero()) std::this_thread::sleep_for(d);
  }
};

class FakeClock : public Clock {
 public:
  duration now() override {
    std::lock_guard lock(mu_);
    return now_;
  }
  void sleep_until(duration t) override {
    std::lock_guard lock(mu_);
    now_ = std::max(now_, t);
  }

 private:
  std::mutex mu_;
  duration now_{0};
};

/// Spaces request start times at least 1 / requests_per_second apart.
class RateLimiter {
 public:
  RateLimiter(double requests_per_second, std::shared_ptr<Clock> clock) : clock_(std::move(clock)) {
    if (!(requests_per_second > 0.0)) throw Error(ErrorKind::InvalidArgument, "rate limit must be positive");
    interval_ = std::chrono::ceil<Clock::duration>(std::chrono::duration<double>(1.0 / requests_per_second));
  }

  /// Blocks until the next slot and returns its start time.
  Clock::duration acquire() {
    Clock::duration slot;
    {
      std::lock_guard lock(mu_);
      slot = std::max(clock_->now(), next_);
      next_ = slot + interval_;
    }
    clock_->sleep_until(slot);
    return slot;
  }

  Clock::duration interval() const noexcept { return interval_; }

 private:
  std::shared_ptr<Clock> clock_;
  Clock::duration interval_{};
  Clock::duration next_{};
  std::mutex mu_;
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

/// Performs one GET. Connection-level failures throw Error(TransportError).
using Transport = std::function<HttpResponse(const std::string& base_url, const std::string& query_string,
                                             std::size_t page)>;

inline std::string percent_encode(std::string_view s) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (char ch : s) {
    auto c = static_cast<unsigned char>(ch);
    if (text::is_alpha(ch) || text::is_digit(ch) || ch == '-' || ch == '_' || ch == '.' || ch == '~') {
      out.push_back(ch);
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0x0f]);
    }
  }
  return out;
}

inline std::string request_query_string(const HarvestQuery& q, std::size_t page) {
  return "q=" + percent_encode(q.query) + "&from=" + format_date(q.date_from) + "&to=" + format_date(q.date_to) +
         "&page=" + std::to_string(page) + "&size=" + std::to_string(q.page_size);
}

inline bool is_file_url(std::string_view url) { return url.starts_with("file://"); }

inline Transport file_transport() {
  return [](const std::string& base_url, const std::string&, std::size_t page) {
    std::filesystem::path dir(base_url.substr(std::string_view("file://").size()));
    auto path = dir / ("page-" + std::to_string(page) + ".json");
    std::ifstream in(path, std::ios::binary);
    if (!in) return HttpResponse{200, R"({"results":[],"total":0})"};
    std::ostringstream ss;
    ss << in.rdbuf();
    return HttpResponse{200, ss.str()};
  };
}

inline Transport http_transport() {
  return [](const std::string& base_url, const std::string& query_string, std::size_t) {
    auto scheme_end = base_url.find("://");
    if (scheme_end == std::string::npos) throw Error(ErrorKind::InvalidArgument, "base_url lacks a scheme");
    auto path_start = base_url.find('/', scheme_end + 3);
    std::string host = base_url.substr(0, path_start);
    std::string path = path_start == std::string::npos ? "/" : base_url.substr(path_start);
    httplib::Client client(host);
    client.set_connection_timeout(10, 0);
    client.set_read_timeout(30, 0);
    client.set_follow_location(true);
    auto res = client.Get(path + (path.find('?') == std::string::npos ? "?" : "&") + query_string);
    if (!res) throw Error(ErrorKind::TransportError, "GET " + base_url + ": " + httplib::to_string(res.error()));
    return HttpResponse{res->status, res->body};
  };
}

/// Content-addressed response cache: <dir>/<sha256>.json plus index.tsv
/// ("digest<TAB>fetched_at<TAB>request" per line). Files are written to a
/// temporary name and renamed into place.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw Error(ErrorKind::CacheError, "cannot create cache directory " + dir_.string() + ": " + ec.message());
  }

  static std::string key(const std::string& base_url, const std::string& query_string) {
    return text::sha256_hex(base_url + "\n" + query_string);
  }

  std::optional<std::string> get(const std::string& key) const {
    std::ifstream in(dir_ / (key + ".json"), std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  void put(const std::string& key, const std::string& body, const std::string& request) {
    std::lock_guard lock(mu_);
    write_atomic(dir_ / (key + ".json"), body);
    std::string index;
    {
      std::ifstream in(dir_ / "index.tsv", std::ios::binary);
      if (in) {
        std::ostringstream ss;
        ss << in.rdbuf();
        index = ss.str();
      }
    }
    index += key + "\t" + utc_timestamp() + "\t" + request + "\n";
    write_atomic(dir_ / "index.tsv", index);
  }

  const std::filesystem::path& dir() const noexcept { return dir_; }

 private:
  static std::string utc_timestamp() {
    std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
  }

  void write_atomic(const std::filesystem::path& target, const std::string& data) {
    auto tmp = target;
    tmp += ".tmp" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out << data;
      if (!out) throw Error(ErrorKind::CacheError, "cannot write " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, target, ec);
    if (ec) throw Error(ErrorKind::CacheError, "cannot rename into " + target.string() + ": " + ec.message());
  }

  std::filesystem::path dir_;
  std::mutex mu_;
};

struct HarvestOptions {
  double rate_limit = 3.0;
  std::size_t concurrency = 4;
  std::optional<std::filesystem::path> cache_dir;
  std::size_t max_attempts = 3;
  Clock::duration backoff = std::chrono::milliseconds(500);
  std::size_t max_pages = 100000;
};

class HarvestClient {
 public:
  explicit HarvestClient(HarvestOptions options = {}, Transport transport = {},
                         std::shared_ptr<Clock> clock = std::make_shared<SystemClock>())
      : options_(std::move(options)),
        transport_(std::move(transport)),
        clock_(std::move(clock)),
        limiter_(options_.rate_limit, clock_) {
    if (options_.concurrency < 1) throw Error(ErrorKind::InvalidArgument, "concurrency must be at least 1");
    if (options_.max_attempts < 1) throw Error(ErrorKind::InvalidArgument, "max_attempts must be at least 1");
    if (options_.cache_dir) cache_ = std::make_unique<ResponseCache>(*options_.cache_dir);
  }

  /// One page of raw (unfiltered) records. Cache hits skip the network;
  /// transport failures, 429 and 5xx responses are retried with
  /// exponential backoff up to max_attempts.
  std::vector<PublicationRecord> fetch_page(const HarvestQuery& query, std::size_t page) {
    query.validate();
    const auto qs = request_query_string(query, page);
    const auto key = ResponseCache::key(query.base_url, qs);
    if (cache_) {
      if (auto body = cache_->get(key)) return parse_page(*body);
    }
    Transport transport = transport_ ? transport_ : (is_file_url(query.base_url) ? file_transport() : http_transport());
    ErrorKind last_kind = ErrorKind::TransportError;
    std::string last_message;
    for (std::size_t attempt = 1; attempt <= options_.max_attempts; ++attempt) {
      if (attempt > 1) clock_->sleep_until(clock_->now() + options_.backoff * (1LL << (attempt - 2)));
      limiter_.acquire();
      HttpResponse res;
      try {
        res = transport(query.base_url, qs, page);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::TransportError) throw;
        last_kind = ErrorKind::TransportError;
        last_message = e.what();
        continue;
      }
      if (res.status == 200) {
        auto records = parse_page(res.body);
        if (cache_) cache_->put(key, res.body, query.base_url + "?" + qs);
        return records;
      }
      last_message = "HTTP " + std::to_string(res.status) + " for page " + std::to_string(page);
      if (res.status == 429) {
        last_kind = ErrorKind::RateLimited;
      } else if (res.status >= 500) {
        last_kind = ErrorKind::TransportError;
      } else {
        throw Error(ErrorKind::TransportError, last_message);
      }
    }
    throw Error(last_kind, last_message + " after " + std::to_string(options_.max_attempts) + " attempts");
  }

  /// All pages until the first empty one, filtered and deduplicated by
  /// paper_id (first occurrence wins). Up to `concurrency` pages are in
  /// flight at once; results keep page order.
  std::vector<PublicationRecord> harvest(const HarvestQuery& query) {
    query.validate();
    std::vector<PublicationRecord> raw;
    bool done = false;
    for (std::size_t first = 1; !done && first <= options_.max_pages; first += options_.concurrency) {
      std::vector<std::future<std::vector<PublicationRecord>>> batch;
      for (std::size_t p = first; p < first + options_.concurrency && p <= options_.max_pages; ++p) {
        batch.push_back(std::async(std::launch::async, [this, &query, p] { return fetch_page(query, p); }));
      }
      std::optional<Error> failure;
      for (auto& f : batch) {
        try {
          auto records = f.get();
          if (done || failure) continue;
          if (records.empty()) {
            done = true;
            continue;
          }
          raw.insert(raw.end(), records.begin(), records.end());
        } catch (const Error& e) {
          if (!done && !failure) failure = e;
        }
      }
      if (failure) throw *failure;
    }
    return filter_records(raw, query);
  }

  static std::vector<PublicationRecord> filter_records(const std::vector<PublicationRecord>& records,
                                                       const HarvestQuery& query) {
    std::vector<PublicationRecord> out;
    std::unordered_set<std::string> seen;
    for (const auto& r : records) {
      if (query.english_only && !is_english(r.language)) continue;
      if (query.exclude_preprints && is_excluded_pub_type(r.pub_type)) continue;
      if (r.date < query.date_from || query.date_to < r.date) continue;
      if (!seen.insert(r.paper_id).second) continue;
      out.push_back(r);
    }
    return out;
  }

 private:
  HarvestOptions options_;
  Transport transport_;
  std::shared_ptr<Clock> clock_;
  RateLimiter limiter_;
  std::unique_ptr<ResponseCache> cache_;
};

/// text = title + " " + abstract with whitespace runs collapsed; one JSON
/// object per record with paper_id, text and (when known) language.
inline void records_to_corpus(const std::vector<PublicationRecord>& records, std::ostream& out) {
  for (const auto& r : records) {
    nlohmann::json j{{"paper_id", r.paper_id}, {"text", text::collapse_whitespace(r.title + " " + r.abstract_text)}};
    if (!r.language.empty()) j["language"] = r.language;
    out << j.dump() << '\n';
  }
  if (!out) throw Error(ErrorKind::IoError, "write failure");
}

}  // namespace clinner

#endif  // CLINNER_INGEST_HPP
