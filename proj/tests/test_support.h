#ifndef TERMFORGE_TESTS_TEST_SUPPORT_H_
#define TERMFORGE_TESTS_TEST_SUPPORT_H_

#include <stdlib.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace testing_support {

inline std::filesystem::path data_dir() { return TERMFORGE_TEST_DATA; }

// Removed with its contents on destruction.
class TempDir {
 public:
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "termforge-XXXXXX").string();
    path_ = mkdtemp(tmpl.data());
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_lines(const std::filesystem::path& path, const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::binary);
  for (const auto& l : lines) out << l << '\n';
}

// Pads a phrase to at least `tokens` whitespace tokens with a filler word.
inline std::string padded(const std::string& text, size_t tokens = 10, const std::string& filler = "zz") {
  std::string out = text;
  size_t count = 0;
  bool in_token = false;
  for (char c : text) {
    if (c == ' ') in_token = false;
    else if (!in_token) {
      in_token = true;
      ++count;
    }
  }
  for (; count < tokens; ++count) out += " " + filler + std::to_string(count);
  return out;
}

}  // namespace testing_support

#endif  // TERMFORGE_TESTS_TEST_SUPPORT_H_
