#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace socialdist {

// Base for everything this library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Errors caused by bad inputs (files, configs, pixel coordinates). The CLI
// maps these to exit code 2; any other exception is an internal error.
class InputError : public Error {
 public:
  using Error::Error;
};

class InvalidIntrinsics : public InputError {
 public:
  using InputError::InputError;
};

class InvalidPixel : public InputError {
 public:
  using InputError::InputError;
};

// A keypoint pair whose two endpoints coincide in the image.
class DegeneratePair : public InputError {
 public:
  using InputError::InputError;
};

// No keypoint pair of a skeleton passes the confidence floor.
class NoUsableKeypoints : public InputError {
 public:
  using InputError::InputError;
};

class MissingAnnotationFile : public InputError {
 public:
  explicit MissingAnnotationFile(const std::string& path)
      : InputError("missing annotation file: " + path), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

class DanglingReference : public InputError {
 public:
  DanglingReference(const std::string& tag, const std::string& image)
      : InputError("unknown tag '" + tag + "' referenced by '" + image + "'"),
        tag_(tag),
        image_(image) {}
  const std::string& tag() const noexcept { return tag_; }
  const std::string& image() const noexcept { return image_; }

 private:
  std::string tag_;
  std::string image_;
};

class ParseError : public InputError {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : InputError(file + ":" + std::to_string(line) + ": " + what), file_(file), line_(line) {}
  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

class MalformedDetection : public InputError {
 public:
  using InputError::InputError;
};

class EmptyEvaluation : public InputError {
 public:
  using InputError::InputError;
};

class InvalidScene : public InputError {
 public:
  using InputError::InputError;
};

class ConfigError : public InputError {
 public:
  using InputError::InputError;
};

class MissingIntrinsics : public InputError {
 public:
  explicit MissingIntrinsics(std::vector<std::string> images)
      : InputError(describe(images)), images_(std::move(images)) {}
  const std::vector<std::string>& images() const noexcept { return images_; }

 private:
  static std::string describe(const std::vector<std::string>& images) {
    std::string msg = "missing intrinsics for " + std::to_string(images.size()) + " image(s):";
    for (const auto& i : images) msg += "\n  " + i;
    return msg;
  }
  std::vector<std::string> images_;
};

}  // namespace socialdist
