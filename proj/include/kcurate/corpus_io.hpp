#pragma once

#include <zlib.h>

#include <cstdio>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kcurate/corpus.hpp"
#include "kcurate/error.hpp"

namespace kcurate {

/// Line reader over plain or gzip files; zlib reads uncompressed input
/// transparently, so one code path serves both.
class LineReader {
 public:
  explicit LineReader(const std::string& path) : path_(path) {
    file_ = gzopen(path.c_str(), "rb");
    if (!file_) fail(ErrorCode::IoError, "cannot open '" + path + "'");
    gzbuffer(file_, 1 << 16);
  }
  ~LineReader() {
    if (file_) gzclose(file_);
  }
  LineReader(const LineReader&) = delete;
  LineReader& operator=(const LineReader&) = delete;

  std::optional<std::string> next() {
    std::string line;
    char buf[8192];
    for (;;) {
      if (!gzgets(file_, buf, sizeof(buf))) {
        int err = 0;
        const char* msg = gzerror(file_, &err);
        if (err != Z_OK && err != Z_STREAM_END)
          fail(ErrorCode::IoError, "read error in '" + path_ + "': " + msg);
        if (line.empty()) return std::nullopt;
        return line;
      }
      line.append(buf);
      if (!line.empty() && line.back() == '\n') {
        line.pop_back();
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
      }
    }
  }

 private:
  std::string path_;
  gzFile file_ = nullptr;
};

/// Streams documents from a line-delimited corpus, skipping blank lines.
class CorpusReader {
 public:
  explicit CorpusReader(const std::string& path) : lines_(path), path_(path) {}

  std::optional<Document> next() {
    while (auto line = lines_.next()) {
      ++line_no_;
      if (line->find_first_not_of(" \t") == std::string::npos) continue;
      try {
        return document_from_json_line(*line);
      } catch (const Error& e) {
        fail(e.code(), path_ + ":" + std::to_string(line_no_) + ": " + e.what());
      }
    }
    return std::nullopt;
  }

  /// Reads up to `max` documents.
  std::vector<Document> batch(std::size_t max) {
    std::vector<Document> out;
    while (out.size() < max) {
      auto d = next();
      if (!d) break;
      out.push_back(std::move(*d));
    }
    return out;
  }

 private:
  LineReader lines_;
  std::string path_;
  std::size_t line_no_ = 0;
};

/// Line writer; paths ending in ".gz" are gzip-compressed. The gzip header
/// carries no timestamp, so identical content gives identical bytes.
class LineWriter {
 public:
  explicit LineWriter(const std::string& path) : path_(path) {
    gzip_ = path.size() > 3 && path.compare(path.size() - 3, 3, ".gz") == 0;
    if (gzip_) {
      gz_ = gzopen(path.c_str(), "wb6");
      if (!gz_) fail(ErrorCode::IoError, "cannot create '" + path + "'");
    } else {
      plain_ = std::fopen(path.c_str(), "wb");
      if (!plain_) fail(ErrorCode::IoError, "cannot create '" + path + "'");
    }
  }
  ~LineWriter() { close(); }
  LineWriter(const LineWriter&) = delete;
  LineWriter& operator=(const LineWriter&) = delete;

  void write_line(std::string_view line) {
    if (gzip_) {
      if (!line.empty() && gzwrite(gz_, line.data(), static_cast<unsigned>(line.size())) == 0)
        fail(ErrorCode::IoError, "write failed: " + path_);
      gzputc(gz_, '\n');
    } else {
      if (std::fwrite(line.data(), 1, line.size(), plain_) != line.size() ||
          std::fputc('\n', plain_) == EOF)
        fail(ErrorCode::IoError, "write failed: " + path_);
    }
  }

  void close() {
    if (gz_) {
      gzclose(gz_);
      gz_ = nullptr;
    }
    if (plain_) {
      std::fclose(plain_);
      plain_ = nullptr;
    }
  }

 private:
  std::string path_;
  bool gzip_ = false;
  gzFile gz_ = nullptr;
  std::FILE* plain_ = nullptr;
};

class CorpusWriter {
 public:
  explicit CorpusWriter(const std::string& path) : lines_(path) {}
  void write(const Document& d) { lines_.write_line(to_json_line(d)); }
  void close() { lines_.close(); }

 private:
  LineWriter lines_;
};

inline std::vector<Document> read_corpus(const std::string& path) {
  CorpusReader reader(path);
  std::vector<Document> out;
  while (auto d = reader.next()) out.push_back(std::move(*d));
  return out;
}

inline void write_corpus(const std::string& path, const std::vector<Document>& docs) {
  CorpusWriter w(path);
  for (const auto& d : docs) w.write(d);
  w.close();
}

}  // namespace kcurate
