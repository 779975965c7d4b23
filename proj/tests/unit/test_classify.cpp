#include <gtest/gtest.h>

#include <sstream>

#include "kcurate/classify.hpp"
#include "kcurate/corpus_io.hpp"
#include "kcurate/pipeline.hpp"
#include "support.hpp"

using namespace kcurate;
using kctest::error_of;

TEST(DetectLanguage, Korean) {
  EXPECT_EQ(detect_language("세종대왕에 관한 어린이 책").language, Language::Korean);
}

TEST(DetectLanguage, Code) {
  EXPECT_EQ(detect_language("def f(x): return x").language, Language::Code);
  EXPECT_EQ(detect_language("```\nint main() {}\n```").language, Language::Code);
}

TEST(DetectLanguage, HalfHangulHalfLatinIsMixed) {
  EXPECT_EQ(detect_language("한국어문장 english").language, Language::MultiLanguage);
}

TEST(DetectLanguage, EnglishAndMath) {
  EXPECT_EQ(detect_language("The quick brown fox jumps over the lazy dog").language, Language::English);
  EXPECT_EQ(detect_language("x^2 + 3x - 4 = 0, ∑ a_i ≤ 10").language, Language::Math);
}

TEST(DetectLanguage, BlankTextFails) {
  EXPECT_EQ(error_of([] { detect_language("  \n\t "); }), ErrorCode::EmptyText);
}

TEST(DetectLanguage, ConfidenceInUnitInterval) {
  for (const char* t : {"가나다", "abc def", "한글 and English mixed 텍스트", "1 + 1 = 2", "def f(): pass"}) {
    const auto g = detect_language(t);
    EXPECT_GE(g.confidence, 0.0) << t;
    EXPECT_LE(g.confidence, 1.0) << t;
  }
}

TEST(TagStyle, HonorificEndingsAreFormalWritten) {
  const auto s = tag_style("이 책은 역사를 다룹니다. 내용이 충실합니다.");
  EXPECT_EQ(s.tone, Tone::Formal);
  EXPECT_EQ(s.mode, Mode::Written);
}

TEST(TagStyle, EllipsisAndLaughterAreSpokenInformal) {
  const auto s = tag_style("진짜 웃겨ㅋㅋㅋ... 나 지금 가는 중이야... 빨리 와~");
  EXPECT_EQ(s.mode, Mode::Spoken);
  EXPECT_EQ(s.tone, Tone::Informal);
}

namespace {

// Two classes told apart by a marker word present in exactly one of them.
std::vector<LabeledText> toy_set() {
  const std::vector<std::string> stems{"오늘 날씨", "시장 가격", "학교 숙제", "버스 노선", "도서관 책",
                                       "점심 메뉴", "축구 경기", "영화 감상", "회의 일정", "여행 계획"};
  std::vector<LabeledText> out;
  for (const auto& s : stems) {
    out.push_back({s + " 바보 멍청이 같은 소리", "toxic"});
    out.push_back({s + " 에 대한 차분한 설명", "clean"});
  }
  return out;
}

}  // namespace

TEST(TrainClassifier, ToySetIsSeparableAndLearnedExactly) {
  const auto data = toy_set();
  ASSERT_EQ(data.size(), 20u);
  // separability: the marker word occurs in every toxic text and no clean one
  for (const auto& ex : data)
    EXPECT_EQ(ex.text.find("바보") != std::string::npos, ex.label == "toxic") << ex.text;
  const auto model = train_linear_model(data, FeatureSpec{16, {2, 3}, 1}, TrainOptions{20, 0.5, 3});
  EXPECT_DOUBLE_EQ(accuracy(model, data), 1.0);
}

TEST(TrainClassifier, EmptyAndSingleClassSets) {
  std::vector<LabeledText> empty;
  EXPECT_EQ(error_of([&] { train_linear_model(empty, FeatureSpec{}); }), ErrorCode::EmptyTrainingSet);
  std::vector<LabeledText> one{{"가", "a"}, {"나", "a"}};
  EXPECT_EQ(error_of([&] { train_linear_model(one, FeatureSpec{}); }), ErrorCode::SingleClass);
}

TEST(TrainClassifier, SameSeedGivesIdenticalWeights) {
  const auto data = toy_set();
  const auto a = train_linear_model(data, FeatureSpec{14, {2, 3}, 9}, TrainOptions{5, 0.5, 42});
  const auto b = train_linear_model(data, FeatureSpec{14, {2, 3}, 9}, TrainOptions{5, 0.5, 42});
  EXPECT_EQ(a, b);
  const auto c = train_linear_model(data, FeatureSpec{14, {2, 3}, 9}, TrainOptions{5, 0.5, 43});
  EXPECT_NE(a.weights(), c.weights());
}

TEST(TrainClassifier, WeightVectorsHaveExactly2PowBEntries) {
  const auto m = train_linear_model(toy_set(), FeatureSpec{12, {2, 3}, 0});
  for (const auto& w : m.weights()) EXPECT_EQ(w.size(), 4096u);
}

TEST(LinearModel, ProbabilitiesSumToOne) {
  const auto m = train_linear_model(toy_set(), FeatureSpec{12, {2, 3}, 0});
  for (const char* t : {"버스 노선", "아무 말", "바보", "x"}) {
    double s = 0;
    for (double p : m.probabilities(t)) s += p;
    EXPECT_NEAR(s, 1.0, 1e-9) << t;
  }
}

TEST(LinearModel, ArgmaxInvariantUnderPositiveScaling) {
  const std::vector<double> scores{0.3, -1.2, 2.5, 2.4};
  for (double c : {0.01, 0.5, 1.0, 7.0, 100.0}) {
    std::vector<double> scaled;
    for (double s : scores) scaled.push_back(s * c);
    const auto p = softmax(scaled);
    EXPECT_EQ(std::max_element(p.begin(), p.end()) - p.begin(), 2) << c;
  }
}

TEST(LinearModel, FeatureHashingIsDeterministic) {
  const FeatureSpec spec{20, {2, 3}, 7};
  const auto a = extract_features("한국어 문장 abc", spec);
  const auto b = extract_features("한국어   문장 ABC", spec);  // same normalized text
  EXPECT_EQ(a.entries, b.entries);
}

TEST(LinearModel, SerializationRoundTripAndSpecMismatch) {
  const auto m = train_linear_model(toy_set(), FeatureSpec{10, {2, 3}, 5});
  std::stringstream ss;
  write_model(ss, m);
  const auto back = read_model(ss);
  EXPECT_EQ(back, m);
  EXPECT_EQ(error_of([&] { back.check_compatible(FeatureSpec{20, {2, 3}, 5}); }), ErrorCode::FeatureSpecMismatch);
  std::stringstream bad("XXXX");
  EXPECT_EQ(error_of([&] { read_model(bad); }), ErrorCode::FormatError);
}

TEST(LinearModel, UntrainedModelRefusesToScore) {
  LinearTextModel m;
  EXPECT_EQ(error_of([&] { m.probabilities("가나다"); }), ErrorCode::UntrainedModel);
}

TEST(LinearModel, WhitespaceOnlyTextHasNoFeatures) {
  const auto m = train_linear_model(toy_set(), FeatureSpec{10, {2, 3}, 0});
  EXPECT_EQ(error_of([&] { m.probabilities("   \n "); }), ErrorCode::EmptyText);
}

class DomainClassifier : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    const auto data = ModelSource::read_labeled(kctest::data("domain.jsonl"));
    model_ = new LinearTextModel(train_domain_classifier(data, FeatureSpec{18, {2, 3}, 3}, TrainOptions{10, 0.5, 3}));
  }
  static void TearDownTestSuite() { delete model_; }
  static LinearTextModel* model_;
};
LinearTextModel* DomainClassifier::model_ = nullptr;

TEST_F(DomainClassifier, KingSejongBookReviewIsHumanityHistory) {
  const auto p = classify_domain(*model_,
                                 "세종대왕의 생애를 다룬 어린이 책을 읽었다. 조선 시대 왕조의 역사와 훈민정음 "
                                 "창제 과정을 사료와 함께 쉽게 설명해 준다.",
                                 SubdomainRegistry::defaults());
  EXPECT_EQ(p.domain, Domain::Humanity);
  EXPECT_EQ(p.subdomain, "History");
}

TEST_F(DomainClassifier, ChlorophyllPassageIsStemBiology) {
  const auto p = classify_domain(*model_,
                                 "엽록소는 식물 세포의 엽록체에 들어 있는 색소로, 빛 에너지를 흡수하여 광합성을 "
                                 "일으킨다. 세포 호흡과 함께 생물의 에너지 대사를 이룬다.",
                                 SubdomainRegistry::defaults());
  EXPECT_EQ(p.domain, Domain::STEM);
  EXPECT_EQ(p.subdomain, "Biology");
  EXPECT_GT(p.probability, 0.0);
  EXPECT_LE(p.probability, 1.0);
}

TEST_F(DomainClassifier, HeldOutFixtureAccuracy) {
  // train on even lines, score odd lines
  const auto data = ModelSource::read_labeled(kctest::data("domain.jsonl"));
  std::vector<LabeledText> train, test;
  for (std::size_t i = 0; i < data.size(); ++i) (i % 2 ? test : train).push_back(data[i]);
  const auto m = train_domain_classifier(train, FeatureSpec{18, {2, 3}, 3}, TrainOptions{10, 0.5, 3});
  EXPECT_GE(accuracy(m, test), 0.8);
}
