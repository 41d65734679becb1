package demo.math;

public class Geometry {

    /**
     * Computes the area of a circle with the given radius.
     */
    public static double circleArea(double radius) {
        return Math.PI * radius * radius;
    }

    /**
     * Computes the distance between two points given their x and y coordinates.
     */
    public static double distance(double x1, double y1, double x2, double y2) {
        double dx = x2 - x1;
        double dy = y2 - y1;
        return Math.sqrt(dx * dx + dy * dy);
    }

    // Calcule le périmètre du rectangle à partir de la largeur et de la hauteur
    public static double rectanglePerimeter(double width, double height) {
        return 2 * (width + height);
    }
}
