package demo.text;

public class HtmlEscaper {

    /**
     * Escapes the html special characters in the text: less than, greater than and ampersand.
     */
    public static String escapeHtml(String text) {
        StringBuilder out = new StringBuilder();
        for (char c : text.toCharArray()) {
            switch (c) {
                case '<': out.append("&lt;"); break;
                case '>': out.append("&gt;"); break;
                case '&': out.append("&amp;"); break;
                default: out.append(c);
            }
        }
        return out.toString();
    }

    // strips every html tag from the text, e.g. "<b>{x}</b>" becomes "{x}"
    public static String stripTags(String text) {
        return text.replaceAll("<[^>]*>", "");
    }
}
