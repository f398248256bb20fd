"""
Preparing Chinese text
======================

Mentions and links are stripped, traditional characters are mapped to
simplified ones, and the text is segmented by forward maximum matching
against a word list. Only nouns, verbs and a few other word classes of two
or more characters are kept.
"""

# %%
from topiclens import Microblog, Preprocessor, extract_hashtags, load_table, normalize, to_simplified
from topiclens.preprocess import MaxMatchSegmenter

table = load_table()
text = "@小明 轉發：#烏坎# 村民選舉結果公佈 http://t.cn/abc 政府回應"
print(normalize(text))
print(to_simplified(normalize(text), table))

# %%
# Hashtags use the paired form on one platform and the prefix form on the other.
print(extract_hashtags("期待#林峰#新专辑", "paired"))
print(extract_hashtags("#Freetibet #乌坎 now", "prefix"))

# %%
# Segmentation with the bundled word list, then filtering.
seg = MaxMatchSegmenter()
simplified = to_simplified(normalize(text), table)
print([(t.surface, t.pos) for t in seg.segment(simplified)])

# Terms come out simplified; hashtags are kept exactly as extracted.
pre = Preprocessor(table, seg)
post = Microblog("1", "weibo", text, hashtags=tuple(extract_hashtags(text, "paired")))
print(pre(post).terms, pre(post).hashtags)
